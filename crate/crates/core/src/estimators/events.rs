//! Indicators of a contour being close to a critical disc in volume, centre and shape.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::contours::{filled_halo, geometric_centre, OuterContour};
use crate::error::Result;
use crate::model_constants::critical_radius;
use crate::torus_geometry::{hausdorff_to_circle, Vec2};

/// Verdicts of the volume, centre and Hausdorff events for one contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourEvents {
    /// |V(z) − πR_c²|.
    pub volume_gap: f64,
    /// Geometric centre (Σ₁, Σ₂) relative to the contour centre.
    pub centre: Vec2,
    /// d_H(∂S(z), ∂B_{R_c}(0)).
    pub hausdorff: f64,
    /// |V(z) − πR_c²| ≤ δ_V.
    pub volume: bool,
    /// max(|Σ₁|, |Σ₂|) ≤ δ_C.
    pub centred: bool,
    /// d_H ≤ ε.
    pub disc_like: bool,
}

/// Evaluates the volume event with tolerance `delta_v`, the centre event with
/// `delta_c` and the Hausdorff event with `eps`, all about the contour centre.
pub fn contour_events(
    contour: &OuterContour,
    kappa: f64,
    delta_v: f64,
    delta_c: f64,
    eps: f64,
) -> Result<ContourEvents> {
    let r_c = critical_radius(kappa)?;
    let halo = filled_halo(contour)?;
    let volume_gap = (halo.area - PI * r_c * r_c).abs();
    let centre = geometric_centre(contour)?.exact;
    let hausdorff = hausdorff_to_circle(&halo, Vec2::default(), r_c);
    Ok(ContourEvents {
        volume_gap,
        centre,
        hausdorff,
        volume: volume_gap <= delta_v,
        centred: centre.x.abs().max(centre.y.abs()) <= delta_c,
        disc_like: hausdorff <= eps,
    })
}
