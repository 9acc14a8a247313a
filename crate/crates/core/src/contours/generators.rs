//! Random contours for tests and sweeps.

use std::f64::consts::PI;

use rand::Rng;

use super::{is_outer_contour, OuterContour};
use crate::error::{Error, Result};
use crate::torus_geometry::Vec2;

/// Number of polygon vertices whose boundary sag is about ε/2 for a disc of radius R.
pub fn polygon_size_for(eps: f64, big_r: f64) -> usize {
    let theta = (8.0 * 0.5 * eps / (big_r * (big_r - 2.0))).sqrt();
    ((2.0 * PI / theta).ceil() as usize).max(3)
}

/// A randomly rotated regular n-gon at radius R − 2 with radial offsets uniform in (−ε/2, ε/2).
pub fn perturbed_polygon<R: Rng + ?Sized>(
    n: usize,
    big_r: f64,
    eps: f64,
    rng: &mut R,
) -> Vec<Vec2> {
    let phase = rng.random_range(0.0..2.0 * PI / n as f64);
    (0..n)
        .map(|k| {
            let rho = rng.random_range(-0.5 * eps..0.5 * eps);
            Vec2::polar(big_r - 2.0 + rho, phase + 2.0 * PI * k as f64 / n as f64)
        })
        .collect()
}

/// A perturbed polygon about the origin accepted by the locality criterion.
pub fn random_outer_contour<R: Rng + ?Sized>(
    n: usize,
    big_r: f64,
    eps: f64,
    rng: &mut R,
    max_tries: usize,
) -> Result<OuterContour> {
    for _ in 0..max_tries {
        let pts = perturbed_polygon(n, big_r, eps, rng);
        if let Ok(true) = is_outer_contour(&pts, big_r, eps) {
            return OuterContour::new(&pts, Vec2::default(), big_r);
        }
    }
    Err(Error::Numeric(format!(
        "no outer contour accepted in {max_tries} tries (n = {n}, eps = {eps})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn generated_contours_satisfy_the_criterion() {
        let mut rng = seeded(3);
        for eps in [0.1, 0.05, 0.025] {
            let n = polygon_size_for(eps, 4.0);
            let c = random_outer_contour(n, 4.0, eps, &mut rng, 1000).unwrap();
            assert_eq!(c.n, n);
            assert!(c.rho.iter().all(|r| r.abs() <= 0.5 * eps));
        }
    }
}
