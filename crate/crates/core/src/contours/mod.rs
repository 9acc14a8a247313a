//! Outer contours of droplet halos: extraction, locality, functionals and expansions.
//!
//! A contour is the angle-ordered list of boundary points z₁,…,z_n of a halo,
//! stored in polar coordinates about a reference centre. Radial offsets are
//! measured from the ring radius R − 2 of a reference disc of radius R.

mod expansion;
mod generators;
mod locality;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus_geometry::{halo, min_image, wrap_angle, Configuration, Vec2};

pub use expansion::{
    chain_areas, delta_and_volume_expansion, delta_exact, filled_configuration, filled_halo,
    functionals, geometric_centre, CentreReport, ExpansionReport, Functionals,
};
pub use generators::{perturbed_polygon, polygon_size_for, random_outer_contour};
pub(crate) use locality::angles_ordered;
pub use locality::{
    contour_membership, globally_extremal, is_outer_contour, outer_intersection,
    triplet_angles_extremal, triplet_is_extremal,
};

const TWO_PI: f64 = 2.0 * PI;

/// Serialized form of a contour: polar coordinates about its centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourRecord {
    pub n: usize,
    pub r: Vec<f64>,
    pub t: Vec<f64>,
}

/// Angle-ordered boundary points in polar coordinates about `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterContour {
    pub n: usize,
    pub r: Vec<f64>,
    /// Polar angles, strictly increasing in [0, 2π).
    pub t: Vec<f64>,
    /// t_{i+1} − t_i, the last one closing the circle.
    pub theta: Vec<f64>,
    /// r_i − (R − 2).
    pub rho: Vec<f64>,
    /// Outermost intersection of the circles about z_i and z_{i+1}, if they meet.
    pub v: Vec<Option<Vec2>>,
    /// |z_i − z_{i+1}|.
    pub u: Vec<f64>,
    /// Opening angle 2 arcsin(u_i/4) of the chord z_i z_{i+1} seen from v_i.
    pub phi: Vec<f64>,
    pub center: Vec2,
    /// Reference disc radius R.
    pub big_r: f64,
}

impl OuterContour {
    /// Contour of the given points about `center`, sorted by polar angle.
    pub fn new(points: &[Vec2], center: Vec2, big_r: f64) -> Result<Self> {
        let mut polar: Vec<(f64, f64)> = points
            .iter()
            .map(|&p| {
                let d = p - center;
                (d.norm(), wrap_angle(d.angle()))
            })
            .collect();
        polar.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (r, t): (Vec<f64>, Vec<f64>) = polar.into_iter().unzip();
        Self::from_polar(r, t, center, big_r)
    }

    /// Contour from polar coordinates already sorted by angle.
    pub fn from_polar(r: Vec<f64>, t: Vec<f64>, center: Vec2, big_r: f64) -> Result<Self> {
        let n = r.len();
        if n == 0 || t.len() != n {
            return Err(Error::Domain(
                "contour needs matching non-empty r and t".into(),
            ));
        }
        if !(big_r > 2.0) {
            return Err(Error::Domain(format!(
                "reference radius must exceed 2, got {big_r}"
            )));
        }
        for i in 0..n {
            if !(r[i] >= 0.0) || !r[i].is_finite() || !(0.0..TWO_PI).contains(&t[i]) {
                return Err(Error::Domain(format!(
                    "invalid polar coordinate at index {i}"
                )));
            }
            if i > 0 && t[i] <= t[i - 1] {
                return Err(Error::Domain(format!(
                    "angles must be strictly increasing (index {i})"
                )));
            }
        }
        let mut theta: Vec<f64> = (0..n.saturating_sub(1)).map(|i| t[i + 1] - t[i]).collect();
        let closing = TWO_PI - theta.iter().sum::<f64>();
        if n > 1 && !(closing > 0.0) {
            return Err(Error::Domain("coincident first and last angles".into()));
        }
        theta.push(closing);
        let rho = r.iter().map(|&ri| ri - (big_r - 2.0)).collect();
        let z: Vec<Vec2> = (0..n).map(|i| center + Vec2::polar(r[i], t[i])).collect();
        let mut v = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        let mut phi = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (z[i], z[(i + 1) % n]);
            let d = a.dist(b);
            u.push(d);
            phi.push(2.0 * (d / 4.0).min(1.0).asin());
            v.push(if n > 1 {
                outer_intersection(a, b, center)
            } else {
                None
            });
        }
        Ok(Self {
            n,
            r,
            t,
            theta,
            rho,
            v,
            u,
            phi,
            center,
            big_r,
        })
    }

    /// Rebuild from a serialized record.
    pub fn from_record(rec: &ContourRecord, center: Vec2, big_r: f64) -> Result<Self> {
        if rec.n != rec.r.len() {
            return Err(Error::Io(format!(
                "record declares n = {} but holds {} radii",
                rec.n,
                rec.r.len()
            )));
        }
        Self::from_polar(rec.r.clone(), rec.t.clone(), center, big_r)
    }

    pub fn record(&self) -> ContourRecord {
        ContourRecord {
            n: self.n,
            r: self.r.clone(),
            t: self.t.clone(),
        }
    }

    /// The boundary points in plane coordinates.
    pub fn points(&self) -> Vec<Vec2> {
        (0..self.n)
            .map(|i| self.center + Vec2::polar(self.r[i], self.t[i]))
            .collect()
    }

    /// The same points re-expressed about another centre.
    pub fn recentred(&self, center: Vec2) -> Result<Self> {
        Self::new(&self.points(), center, self.big_r)
    }

    /// The contour rotated by `alpha` about its centre.
    pub fn rotated(&self, alpha: f64) -> Result<Self> {
        let pts: Vec<Vec2> = self
            .points()
            .iter()
            .map(|&p| self.center + (p - self.center).rotate(alpha))
            .collect();
        Self::new(&pts, self.center, self.big_r)
    }

    /// The contour with the reference radius replaced.
    pub fn with_reference(&self, big_r: f64) -> Result<Self> {
        Self::from_polar(self.r.clone(), self.t.clone(), self.center, big_r)
    }
}

/// The boundary points of a droplet halo, angle-ordered about its geometric centre.
///
/// Interior points, whose discs contribute no boundary arc, are dropped.
pub fn extract_boundary_points(config: &Configuration, big_r: f64) -> Result<OuterContour> {
    let h = halo(config)?;
    if !h.fits_domain() {
        return Err(Error::Geometry(
            "halo does not fit in one fundamental domain".into(),
        ));
    }
    if h.chains.len() != 1 {
        return Err(Error::Geometry(format!(
            "halo boundary has {} components",
            h.chains.len()
        )));
    }
    if h.eroded.holes != Some(0) {
        return Err(Error::Geometry(
            "eroded region is not simply connected".into(),
        ));
    }
    let chain = &h.chains[0];
    let mut order: Vec<usize> = Vec::with_capacity(chain.arcs.len());
    for &a in &chain.arcs {
        let p = h.arcs[a].point;
        if order.last() != Some(&p) {
            order.push(p);
        }
    }
    if order.len() > 1 && order.first() == order.last() {
        order.pop();
    }
    let mut seen = order.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != order.len() {
        return Err(Error::Geometry(
            "a boundary point contributes several separate arcs".into(),
        ));
    }
    let anchor = config.points[order[0]].vec();
    let pts: Vec<Vec2> = order
        .iter()
        .map(|&i| anchor + min_image(anchor, config.points[i].vec(), config.l))
        .collect();
    let center = centre_of_points(&pts);
    let contour = OuterContour::new(&pts, center, big_r)?;
    let n = pts.len();
    if n > 2 {
        let first = contour.points()[0];
        let k = pts
            .iter()
            .position(|&p| p.dist(first) < 1e-9)
            .ok_or_else(|| Error::Geometry("lost a boundary point while sorting".into()))?;
        let sorted = contour.points();
        for (j, p) in sorted.iter().enumerate() {
            if p.dist(pts[(k + j) % n]) > 1e-9 {
                return Err(Error::Geometry(
                    "boundary points are not star-shaped about the centre".into(),
                ));
            }
        }
    }
    Ok(contour)
}

/// Σ z̄_i u_i / Σ u_i for a cyclically ordered point list; the point mean if degenerate.
pub(crate) fn centre_of_points(pts: &[Vec2]) -> Vec2 {
    let n = pts.len();
    let mut num = Vec2::default();
    let mut den = 0.0;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let u = a.dist(b);
        num = num + (a + b) * (0.5 * u);
        den += u;
    }
    if den > 0.0 {
        num * (1.0 / den)
    } else {
        pts.iter().fold(Vec2::default(), |acc, &p| acc + p) * (1.0 / n as f64)
    }
}
