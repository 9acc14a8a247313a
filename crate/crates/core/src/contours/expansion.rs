//! The functionals y₁…y₆, exact areas of filled contours and their expansions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{centre_of_points, OuterContour};
use crate::error::{Error, Result};
use crate::model_constants::{critical_radius, DerivedConstants};
use crate::torus_geometry::{
    arc_distance_range, halo, halo_boundary, hausdorff_to_circle, Configuration, Halo, Vec2,
};

/// Expansions are flagged as unreliable beyond this Hausdorff distance.
const EXPANSION_EPS_LIMIT: f64 = 0.2;

/// Spacing of the triangular lattice of filler points.
const FILLER_SPACING: f64 = 1.5;

/// The functionals of a contour together with the averaged quantities they use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    /// Σ θ_i³.
    pub y1: f64,
    /// Σ (ρ_{i+1} − ρ_i)² / θ_i.
    pub y2: f64,
    /// Σ ρ̄_i² θ_i.
    pub y3: f64,
    /// Σ ρ̄_i θ_i.
    pub y4: f64,
    /// Σ θ_i · ½(ρ_i cos t_i + ρ_{i+1} cos t_{i+1}).
    pub y5: f64,
    /// Σ θ_i · ½(ρ_i sin t_i + ρ_{i+1} sin t_{i+1}).
    pub y6: f64,
    /// ½(ρ_i + ρ_{i+1}).
    pub rho_bar: Vec<f64>,
    pub rho_cos_bar: Vec<f64>,
    pub rho_sin_bar: Vec<f64>,
}

/// The functionals y₁…y₆ of a contour.
pub fn functionals(c: &OuterContour) -> Result<Functionals> {
    let n = c.n;
    if c.theta.iter().any(|&th| !(th > 0.0)) {
        return Err(Error::Domain(
            "contour has a vanishing angular increment".into(),
        ));
    }
    let next = |i: usize| (i + 1) % n;
    let rho_bar: Vec<f64> = (0..n).map(|i| 0.5 * (c.rho[i] + c.rho[next(i)])).collect();
    let rho_cos_bar: Vec<f64> = (0..n)
        .map(|i| 0.5 * (c.rho[i] * c.t[i].cos() + c.rho[next(i)] * c.t[next(i)].cos()))
        .collect();
    let rho_sin_bar: Vec<f64> = (0..n)
        .map(|i| 0.5 * (c.rho[i] * c.t[i].sin() + c.rho[next(i)] * c.t[next(i)].sin()))
        .collect();
    let mut f = Functionals {
        y1: 0.0,
        y2: 0.0,
        y3: 0.0,
        y4: 0.0,
        y5: 0.0,
        y6: 0.0,
        rho_bar,
        rho_cos_bar,
        rho_sin_bar,
    };
    for i in 0..n {
        let th = c.theta[i];
        f.y1 += th.powi(3);
        f.y2 += (c.rho[next(i)] - c.rho[i]).powi(2) / th;
        f.y3 += f.rho_bar[i].powi(2) * th;
        f.y4 += f.rho_bar[i] * th;
        f.y5 += f.rho_cos_bar[i] * th;
        f.y6 += f.rho_sin_bar[i] * th;
    }
    Ok(f)
}

/// Points of a triangular lattice about `center` within distance `radius`.
fn lattice_fill(center: Vec2, radius: f64) -> Vec<Vec2> {
    if radius < 0.0 {
        return Vec::new();
    }
    let s = FILLER_SPACING;
    let h = s * 3f64.sqrt() / 2.0;
    let rows = (radius / h).ceil() as i64 + 1;
    let cols = (radius / s).ceil() as i64 + 2;
    let mut out = Vec::new();
    for j in -rows..=rows {
        for i in -cols..=cols {
            let p = Vec2::new(
                i as f64 * s + 0.5 * s * (j.rem_euclid(2)) as f64,
                j as f64 * h,
            );
            if p.norm() <= radius {
                out.push(center + p);
            }
        }
    }
    out
}

/// The contour points followed by filler points that close the inner hole of their halo.
///
/// Fillers are placed on a lattice inside the region enclosed by the outer
/// boundary, at distance at least 2 from it, so their discs leave S(z)
/// unchanged apart from filling holes.
pub fn filled_configuration(c: &OuterContour) -> Result<Configuration> {
    let z = c.points();
    let extent = z.iter().map(|p| (*p - c.center).norm()).fold(0.0, f64::max);
    let l = 4.0 * (extent + 8.0);
    let local: Vec<Vec2> = z.iter().map(|&p| p - c.center).collect();
    let bare = Configuration::new(&local, l)?;
    let b = halo_boundary(&bare);
    let outer: Vec<_> = b.chains.iter().filter(|ch| ch.signed_area > 0.0).collect();
    if b.wraps || outer.len() != 1 {
        return Err(Error::Geometry(
            "contour halo has no single outer boundary".into(),
        ));
    }
    let inner = outer[0]
        .arcs
        .iter()
        .map(|&a| arc_distance_range(&b.arcs[a], Vec2::default(), l).0)
        .fold(f64::INFINITY, f64::min);
    let mut pts = local;
    pts.extend(lattice_fill(Vec2::default(), inner - 2.0 - 1e-9));
    Configuration::new(&pts, l)
}

/// The halo S(z) of the filled contour, placed with the contour centre at the origin.
pub fn filled_halo(c: &OuterContour) -> Result<Halo> {
    let cfg = filled_configuration(c)?;
    let h = halo(&cfg)?;
    if h.chains.len() != 1 || h.arcs.iter().any(|a| a.point >= c.n) {
        return Err(Error::Geometry(
            "filler points failed to close the contour".into(),
        ));
    }
    Ok(h)
}

/// |S(z)| and |S(z)⁻| from the per-edge formulas of a contour.
///
/// Each edge contributes the triangle (0, z_i, z_{i+1}), the triangle
/// (z_i, z_{i+1}, v_i) and the sector of B₂(v_i) between them; all boundary
/// points must be extremal.
pub fn chain_areas(c: &OuterContour) -> Result<(f64, f64)> {
    match c.n {
        1 => return Ok((4.0 * PI, 0.0)),
        2 => {
            let phi = c.phi[0];
            return Ok((4.0 * PI + 4.0 * phi + 4.0 * phi.sin(), 0.0));
        }
        _ => {}
    }
    if c.v.iter().any(|v| v.is_none()) || c.u.iter().any(|&u| u > 4.0) {
        return Err(Error::Geometry(
            "consecutive circles do not intersect".into(),
        ));
    }
    let mut area = 0.0;
    let mut interior = 0.0;
    for i in 0..c.n {
        let j = (i + 1) % c.n;
        let tri = 0.5 * c.r[i] * c.r[j] * c.theta[i].sin();
        let phi = c.phi[i];
        area += tri + 2.0 * phi.sin() + 2.0 * (phi + c.theta[i]);
        interior += tri - 2.0 * (phi - phi.sin());
    }
    Ok((area, interior))
}

fn disc_energy(kappa: f64, r_c: f64) -> f64 {
    PI * r_c * r_c - kappa * PI * (r_c - 2.0).powi(2)
}

/// Δ(z) = (|S(z)| − κ|S(z)⁻|) − (πR_c² − κπ(R_c − 2)²) from exact halo areas.
pub fn delta_exact(c: &OuterContour, kappa: f64) -> Result<f64> {
    let r_c = critical_radius(kappa)?;
    let h = filled_halo(c)?;
    Ok(h.area - kappa * h.interior_area - disc_energy(kappa, r_c))
}

/// Exact and first-order geometric centre, relative to the contour centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentreReport {
    /// Σ z̄_i u_i / Σ u_i.
    pub exact: Vec2,
    /// (y₅/π, y₆/π).
    pub first_order: Vec2,
    /// |exact − first_order|.
    pub residual: f64,
}

/// The geometric centre of a contour and its first-order approximation.
pub fn geometric_centre(c: &OuterContour) -> Result<CentreReport> {
    let f = functionals(c)?;
    Ok(centre_report(c, &f))
}

fn centre_report(c: &OuterContour, f: &Functionals) -> CentreReport {
    let exact = centre_of_points(&c.points()) - c.center;
    let first_order = Vec2::new(f.y5 / PI, f.y6 / PI);
    CentreReport {
        exact,
        first_order,
        residual: (exact - first_order).norm(),
    }
}

/// Exact values of Δ, the volume deficit and the centre next to their expansions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    /// Hausdorff distance between ∂S(z) and the critical circle about the contour centre.
    pub eps: f64,
    pub y: [f64; 6],
    pub delta_exact: f64,
    /// C₁y₁ + C₃y₂ − C₃y₃.
    pub delta_expanded: f64,
    /// |S(z)| − πR_c².
    pub volume_exact: f64,
    /// −C₁y₁ + C₃y₂ + ½y₃ + C₂y₄.
    pub volume_expanded: f64,
    pub centre_exact: Vec2,
    pub centre_firstorder: Vec2,
    pub delta_residual: f64,
    pub volume_residual: f64,
    pub centre_residual: f64,
    pub warning: Option<String>,
}

/// Compares Δ(z), |S(z)| − πR_c² and the centre with their leading-order expansions.
pub fn delta_and_volume_expansion(
    c: &OuterContour,
    constants: &DerivedConstants,
) -> Result<ExpansionReport> {
    if (c.big_r - constants.r_c).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "contour reference radius {} differs from the critical radius {}",
            c.big_r, constants.r_c
        )));
    }
    let kappa = 1.0 + 2.0 * constants.c3;
    let f = functionals(c)?;
    let h = filled_halo(c)?;
    let eps = hausdorff_to_circle(&h, Vec2::default(), constants.r_c);
    let delta_exact = h.area - kappa * h.interior_area - disc_energy(kappa, constants.r_c);
    let volume_exact = h.area - PI * constants.r_c * constants.r_c;
    let delta_expanded = constants.c1 * f.y1 + constants.c3 * f.y2 - constants.c3 * f.y3;
    let volume_expanded =
        -constants.c1 * f.y1 + constants.c3 * f.y2 + 0.5 * f.y3 + constants.c2 * f.y4;
    let centre = centre_report(c, &f);
    let warning = (eps > EXPANSION_EPS_LIMIT).then(|| {
        format!("Hausdorff distance {eps:.3} exceeds {EXPANSION_EPS_LIMIT}; expansion unreliable")
    });
    Ok(ExpansionReport {
        eps,
        y: [f.y1, f.y2, f.y3, f.y4, f.y5, f.y6],
        delta_exact,
        delta_expanded,
        volume_exact,
        volume_expanded,
        centre_exact: centre.exact,
        centre_firstorder: centre.first_order,
        delta_residual: delta_exact - delta_expanded,
        volume_residual: volume_exact - volume_expanded,
        centre_residual: centre.residual,
        warning,
    })
}
