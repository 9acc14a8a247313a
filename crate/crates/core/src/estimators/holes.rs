//! Probability that Poisson points in the eroded region leave part of it uncovered.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::contours::{chain_areas, filled_halo, OuterContour};
use crate::error::{Error, Result};
use crate::model_constants::ModelParams;
use crate::numerics::clopper_pearson_upper;
use crate::torus_geometry::{eroded_contains, Halo, Vec2};

/// Grid spacing constant c in δ = c·α^{−2/3}.
pub const GRID_CONSTANT: f64 = 0.1;

/// Monte Carlo estimate of the hole probability p_α(z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleEstimate {
    /// Intensity α = κβ.
    pub alpha: f64,
    /// |S(z)⁻|.
    pub interior_area: f64,
    pub grid_spacing: f64,
    pub grid_points: usize,
    pub replicas: usize,
    pub hits: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// 95% one-sided bound reported when no hole is seen.
    pub upper_bound: Option<f64>,
}

struct Region {
    halo: Halo,
    /// S⁻ lies in the disc of this radius about the contour centre.
    radius: f64,
}

impl Region {
    fn contains(&self, x: Vec2) -> bool {
        x.norm() <= self.radius && eroded_contains(&self.halo.config, &self.halo.arcs, x)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec2 {
        let r = self.radius;
        loop {
            let x = Vec2::new(rng.random_range(-r..=r), rng.random_range(-r..=r));
            if self.contains(x) {
                return x;
            }
        }
    }
}

/// Points binned in square cells of side 2.
struct Buckets {
    origin: f64,
    side: usize,
    cells: Vec<Vec<Vec2>>,
}

impl Buckets {
    fn new(radius: f64, points: &[Vec2]) -> Self {
        let origin = -radius;
        let side = ((2.0 * radius) / 2.0).ceil().max(1.0) as usize;
        let mut cells = vec![Vec::new(); side * side];
        let mut b = Self {
            origin,
            side,
            cells: Vec::new(),
        };
        for &p in points {
            let (i, j) = b.cell(p);
            cells[j * side + i].push(p);
        }
        b.cells = cells;
        b
    }

    fn cell(&self, p: Vec2) -> (usize, usize) {
        let f = |v: f64| (((v - self.origin) / 2.0).floor().max(0.0) as usize).min(self.side - 1);
        (f(p.x), f(p.y))
    }

    fn covered(&self, x: Vec2) -> bool {
        let (i, j) = self.cell(x);
        let lo = |k: usize| k.saturating_sub(1);
        let hi = |k: usize| (k + 1).min(self.side - 1);
        for jj in lo(j)..=hi(j) {
            for ii in lo(i)..=hi(i) {
                if self.cells[jj * self.side + ii]
                    .iter()
                    .any(|p| (*p - x).norm2() <= 4.0)
                {
                    return true;
                }
            }
        }
        false
    }
}

/// Estimates p_α(z), the probability that the radius-2 discs about a
/// Poisson(α) configuration in S(z)⁻ fail to cover S(z)⁻, with α = κβ.
///
/// Coverage is tested on the lattice of spacing δ = 0.1·α^{−2/3} restricted
/// to S(z)⁻. Contours with at most two points have |S⁻| = 0 and p = 0.
pub fn hole_probability_estimate<R: Rng + ?Sized>(
    contour: &OuterContour,
    params: &ModelParams,
    replicas: usize,
    rng: &mut R,
) -> Result<HoleEstimate> {
    if replicas == 0 {
        return Err(Error::Domain("need at least one replica".into()));
    }
    let alpha = params.kappa * params.beta;
    let spacing = GRID_CONSTANT * alpha.powf(-2.0 / 3.0);
    let (_, interior_area) = chain_areas(contour)?;
    let empty = HoleEstimate {
        alpha,
        interior_area,
        grid_spacing: spacing,
        grid_points: 0,
        replicas,
        hits: 0,
        estimate: 0.0,
        stderr: 0.0,
        upper_bound: None,
    };
    if contour.n <= 2 || interior_area <= 0.0 {
        return Ok(HoleEstimate {
            interior_area: 0.0,
            ..empty
        });
    }
    let region = Region {
        halo: filled_halo(contour)?,
        radius: contour.r.iter().cloned().fold(0.0, f64::max),
    };
    let k = (region.radius / spacing).ceil() as i64;
    let grid: Vec<Vec2> = (-k..=k)
        .flat_map(|i| (-k..=k).map(move |j| Vec2::new(i as f64 * spacing, j as f64 * spacing)))
        .filter(|&x| region.contains(x))
        .collect();
    let poisson = Poisson::new(alpha * interior_area)
        .map_err(|e| Error::Domain(format!("Poisson mean: {e}")))?;
    let mut hits = 0;
    for _ in 0..replicas {
        let n = poisson.sample(rng) as usize;
        let pts: Vec<Vec2> = (0..n).map(|_| region.sample(rng)).collect();
        if pts.is_empty() {
            hits += 1;
            continue;
        }
        if pts.iter().any(|p| p.norm() + region.radius <= 2.0) {
            continue;
        }
        let buckets = Buckets::new(region.radius, &pts);
        if grid.iter().any(|&x| !buckets.covered(x)) {
            hits += 1;
        }
    }
    let m = replicas as f64;
    let p = hits as f64 / m;
    Ok(HoleEstimate {
        grid_points: grid.len(),
        hits,
        estimate: p,
        stderr: (p * (1.0 - p) / m).sqrt(),
        upper_bound: (hits == 0).then(|| clopper_pearson_upper(0.0, m, 0.95)),
        ..empty
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_constants::critical_radius;
    use crate::rng::seeded;
    use std::f64::consts::PI;

    fn ring(n: usize, kappa: f64) -> OuterContour {
        let r = critical_radius(kappa).unwrap() - 2.0 + 0.01;
        let t: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        OuterContour::from_polar(vec![r; n], t, Vec2::default(), r + 2.0).unwrap()
    }

    #[test]
    fn short_contours_have_no_holes() {
        let p = ModelParams::new(2.0, 1.0, 20.0).unwrap();
        let one = OuterContour::from_polar(vec![1.0], vec![0.0], Vec2::default(), 4.0).unwrap();
        let e = hole_probability_estimate(&one, &p, 10, &mut seeded(1)).unwrap();
        assert_eq!((e.estimate, e.interior_area), (0.0, 0.0));
    }

    #[test]
    fn grid_lies_in_the_eroded_region() {
        let c = ring(24, 2.0);
        let p = ModelParams::new(2.0, 5.0, 20.0).unwrap();
        let e = hole_probability_estimate(&c, &p, 1, &mut seeded(2)).unwrap();
        let cell = e.grid_spacing * e.grid_spacing;
        let approx = e.grid_points as f64 * cell;
        assert!(
            (approx - e.interior_area).abs() < 0.02 * e.interior_area,
            "{approx} vs {}",
            e.interior_area
        );
    }

    #[test]
    fn small_eroded_region_matches_the_empty_probability() {
        // For κ = 10 the eroded region has diameter below 2, so a single point covers it.
        let c = ring(12, 10.0);
        let p = ModelParams::new(10.0, 0.5, 20.0).unwrap();
        let e = hole_probability_estimate(&c, &p, 20_000, &mut seeded(3)).unwrap();
        let exact = (-5.0 * e.interior_area).exp();
        assert!(
            (e.estimate - exact).abs() < 4.0 * e.stderr.max(1e-4),
            "{e:?} vs {exact}"
        );
    }
}
