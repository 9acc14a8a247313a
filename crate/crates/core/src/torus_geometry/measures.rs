//! Hausdorff distances, the Steiner identity and rate functions of halos.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::erosion::ErodedRegion;
use super::halo::{ArcSegment, Halo};
use super::{min_image, Vec2};
use crate::error::Result;
use crate::model_constants::phi_profile;
use crate::numerics::compass_minimise;

/// Largest and smallest distance from `center` to the points of an arc.
pub(crate) fn arc_distance_range(arc: &ArcSegment, center: Vec2, l: f64) -> (f64, f64) {
    let w = min_image(center, arc.center.vec(), l);
    let dist = |phi: f64| (w + Vec2::polar(arc.radius, phi)).norm();
    let mut lo = dist(arc.interval.start).min(dist(arc.interval.end()));
    let mut hi = dist(arc.interval.start).max(dist(arc.interval.end()));
    if w.norm() > 0.0 {
        let psi = w.angle();
        if arc.interval.contains(psi) {
            hi = hi.max(w.norm() + arc.radius);
        }
        if arc.interval.contains(psi + PI) {
            lo = lo.min((w.norm() - arc.radius).abs());
        }
    } else {
        lo = arc.radius;
        hi = arc.radius;
    }
    (lo, hi)
}

/// Hausdorff distance between a closed arc chain and the circle ∂B_R(center).
///
/// Evaluated exactly per arc as the largest deviation of |p − center| from R.
/// This equals the Hausdorff distance for chains that are star-shaped about
/// the centre, which covers every outer contour.
pub fn arcs_hausdorff_to_circle(arcs: &[ArcSegment], center: Vec2, radius: f64, l: f64) -> f64 {
    arcs.iter()
        .map(|a| {
            let (lo, hi) = arc_distance_range(a, center, l);
            (radius - lo).abs().max((hi - radius).abs())
        })
        .fold(0.0, f64::max)
}

/// Hausdorff distance between ∂S of a halo and the circle ∂B_R(center).
pub fn hausdorff_to_circle(halo: &Halo, center: Vec2, radius: f64) -> f64 {
    arcs_hausdorff_to_circle(&halo.arcs, center, radius, halo.config.l)
}

/// The eroded region S⁻ of a halo.
pub fn erosion_interior(halo: &Halo) -> ErodedRegion {
    halo.eroded.clone()
}

/// Terms of the Steiner identity |S∖S⁻| = 2H¹(∂S⁻) + 4πχ(S⁻).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinerReport {
    /// |S| − |S⁻|.
    pub shell_area: f64,
    /// 2H¹(∂S⁻).
    pub perimeter_term: f64,
    /// 4πχ(S⁻), or NaN when χ is undefined.
    pub euler_term: f64,
    /// shell_area − perimeter_term − euler_term.
    pub residual: f64,
    /// Whether S⁻ is connected and each component of T∖S⁻ holds exactly one component of T∖S.
    pub condition_holds: bool,
}

/// Residual of the Steiner identity, flagging halos that violate the reach condition.
pub fn steiner_identity_check(halo: &Halo) -> SteinerReport {
    let shell_area = halo.area - halo.interior_area;
    let perimeter_term = 2.0 * halo.interior_boundary_length;
    let euler_term = halo
        .interior_euler()
        .map_or(f64::NAN, |chi| 4.0 * PI * chi as f64);
    SteinerReport {
        shell_area,
        perimeter_term,
        euler_term,
        residual: shell_area - perimeter_term - euler_term,
        condition_holds: halo.eroded.reach_condition,
    }
}

/// J(S) = |S| − κ|S⁻|.
pub fn rate_function_j(halo: &Halo, kappa: f64) -> f64 {
    halo.area - kappa * halo.interior_area
}

/// I(S) = J(S) − (1 − κ)|T|.
pub fn rate_function_i(halo: &Halo, kappa: f64) -> f64 {
    rate_function_j(halo, kappa) - (1.0 - kappa) * halo.config.l * halo.config.l
}

/// Outcome of the isoperimetric and Bonnesen checks for one halo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BonnesenReport {
    pub j: f64,
    /// Φ_κ(R).
    pub phi: f64,
    /// (J(S) − Φ_κ(R)) / (πκ).
    pub eps: f64,
    /// Hausdorff distance from ∂S to the best circle of radius R.
    pub hausdorff: f64,
    pub best_center: Vec2,
    /// (3/2)√(R ε).
    pub bound: f64,
    /// J(S) ≥ Φ_κ(R) − tol.
    pub isoperimetric_holds: bool,
    /// Hausdorff distance ≤ bound.
    pub bonnesen_holds: bool,
}

/// Checks J(S) ≥ Φ_κ(R) and the Bonnesen bound d_H(∂S, ∂B_R(x)) ≤ (3/2)√(Rε)
/// for the best centre x, for a halo with |S| = πR².
pub fn bonnesen_check(halo: &Halo, kappa: f64, radius: f64, tol: f64) -> Result<BonnesenReport> {
    let j = rate_function_j(halo, kappa);
    let phi = phi_profile(kappa, radius)?;
    let eps = (j - phi) / (PI * kappa);
    let l = halo.config.l;
    let anchor = halo.config.points[0].vec();
    let mean = halo.config.points.iter().fold(Vec2::default(), |acc, p| {
        acc + min_image(anchor, p.vec(), l)
    }) * (1.0 / halo.config.len() as f64);
    let start = anchor + mean;
    let objective = |x: f64, y: f64| hausdorff_to_circle(halo, Vec2::new(x, y), radius);
    let ((x, y), hausdorff) = compass_minimise(objective, (start.x, start.y), 0.5, 1e-10);
    let bound = 1.5 * (radius * eps.max(0.0)).sqrt();
    Ok(BonnesenReport {
        j,
        phi,
        eps,
        hausdorff,
        best_center: Vec2::new(x, y),
        bound,
        isoperimetric_holds: j >= phi - tol,
        bonnesen_holds: hausdorff <= bound + tol,
    })
}
