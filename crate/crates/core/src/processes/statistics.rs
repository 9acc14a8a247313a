//! Tilt weights, Z-configurations and the surface statistics Y₀…Y₄, D₁, D₁*, χ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{AngularSample, KlPath};
use crate::contours::{contour_membership, OuterContour};
use crate::error::{Error, Result};
use crate::model_constants::{critical_radius, g_kappa, ModelParams};
use crate::torus_geometry::Vec2;

/// Ŷ₀ = ½ Σ log(2πβ^{1/3}G_κΘ_i), Ŷ₁ = (1/24) Σ (β^{1/3}G_κΘ_i)³ and log-weight Ŷ₀ − Ŷ₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltWeight {
    pub y0_hat: f64,
    pub y1_hat: f64,
    pub log_weight: f64,
}

impl TiltWeight {
    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }
}

/// Tilt weight exp(Ŷ₀ − Ŷ₁) of an angular sample.
pub fn tilt_weight(sample: &AngularSample, params: &ModelParams) -> Result<TiltWeight> {
    let scale = params.beta.cbrt() * g_kappa(params.kappa)?;
    let mut y0_hat = 0.0;
    let mut y1_hat = 0.0;
    for &th in &sample.theta {
        y0_hat += 0.5 * (2.0 * PI * scale * th).ln();
        y1_hat += (scale * th).powi(3) / 24.0;
    }
    Ok(TiltWeight {
        y0_hat,
        y1_hat,
        log_weight: y0_hat - y1_hat,
    })
}

/// Boundary points Z_i = r_i (cos T_i, sin T_i) with r_i = (R_c − 2) + (m + B_{T_i})/√((κ−1)β).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZConfiguration {
    pub m: f64,
    pub params: ModelParams,
    pub sample: AngularSample,
    /// B_{T_i}.
    pub bridge: Vec<f64>,
    pub radii: Vec<f64>,
    pub points: Vec<Vec2>,
}

impl ZConfiguration {
    /// 1/√((κ−1)β).
    pub fn scale(&self) -> f64 {
        1.0 / ((self.params.kappa - 1.0) * self.params.beta).sqrt()
    }

    /// Radial offsets r_i − (R_c − 2).
    pub fn rho(&self) -> Vec<f64> {
        let ring = critical_radius(self.params.kappa).expect("validated kappa") - 2.0;
        self.radii.iter().map(|r| r - ring).collect()
    }

    /// Whether the points form an outer contour by the triplet criterion.
    pub fn is_member(&self) -> bool {
        contour_membership(&self.points)
    }

    /// The points as a contour about the origin, with the critical radius as reference.
    pub fn contour(&self) -> Result<OuterContour> {
        let r_c = critical_radius(self.params.kappa)?;
        OuterContour::from_polar(
            self.radii.clone(),
            self.sample.t.clone(),
            Vec2::default(),
            r_c,
        )
    }
}

/// The Z-configuration for mean offset `m` and bridge values at the sample angles.
pub fn build_z(
    m: f64,
    sample: &AngularSample,
    bridge: &[f64],
    params: &ModelParams,
) -> Result<ZConfiguration> {
    if bridge.len() != sample.n {
        return Err(Error::Domain(format!(
            "{} bridge values for {} angles",
            bridge.len(),
            sample.n
        )));
    }
    let ring = critical_radius(params.kappa)? - 2.0;
    let scale = 1.0 / ((params.kappa - 1.0) * params.beta).sqrt();
    let radii: Vec<f64> = bridge.iter().map(|b| ring + (m + b) * scale).collect();
    if let Some(i) = radii.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::Domain(format!(
            "non-positive radius {} at index {i}",
            radii[i]
        )));
    }
    let points = radii
        .iter()
        .zip(&sample.t)
        .map(|(&r, &t)| Vec2::polar(r, t))
        .collect();
    Ok(ZConfiguration {
        m,
        params: *params,
        sample: sample.clone(),
        bridge: bridge.to_vec(),
        radii,
        points,
    })
}

/// Surface statistics of a Z-configuration, with the terms of
/// Y₃ = ℰ₁ + ℰ₂ − ℰ₃ + χ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceStatistics {
    pub n: usize,
    /// Ŷ₀.
    pub y0: f64,
    /// Σ Θ_i³.
    pub y1: f64,
    /// Σ (B_{T_{i+1}} − B_{T_i})²/Θ_i.
    pub y2: f64,
    /// Σ (m + B̄_i)² Θ_i.
    pub y3: f64,
    /// Σ (m + B̄_i) Θ_i.
    pub y4: f64,
    pub d1: f64,
    pub d1_star: f64,
    /// Σ Θ_i B̄_i² − D₁² − D₁*².
    pub chi: f64,
    /// Y₄²/(2π).
    pub cal_e1: f64,
    /// D₁² + D₁*².
    pub cal_e2: f64,
    /// (Σ B̄_i Θ_i)²/(2π).
    pub cal_e3: f64,
    /// Σ B̄_i Θ_i.
    pub bbar_sum: f64,
    /// Σ B̄_i² Θ_i.
    pub bbar_sq_sum: f64,
}

impl SurfaceStatistics {
    /// Y₃ − (ℰ₁ + ℰ₂ − ℰ₃ + χ).
    pub fn decomposition_residual(&self) -> f64 {
        self.y3 - (self.cal_e1 + self.cal_e2 - self.cal_e3 + self.chi)
    }
}

/// The statistics Y₀…Y₄, D₁, D₁*, χ and the ℰ terms of a Z-configuration with N ≥ 1.
pub fn surface_statistics(z: &ZConfiguration) -> Result<SurfaceStatistics> {
    let s = &z.sample;
    let n = s.n;
    if n == 0 {
        return Err(Error::Domain("statistics need at least one point".into()));
    }
    if s.theta.iter().any(|&th| !(th > 0.0)) {
        return Err(Error::Domain("coincident angles".into()));
    }
    let b = &z.bridge;
    let next = |i: usize| (i + 1) % n;
    let (mut y2, mut y3, mut y4) = (0.0, 0.0, 0.0);
    let (mut d1, mut d1s) = (0.0, 0.0);
    let (mut bsum, mut bsq) = (0.0, 0.0);
    for i in 0..n {
        let j = next(i);
        let th = s.theta[i];
        let bbar = 0.5 * (b[i] + b[j]);
        y2 += (b[j] - b[i]).powi(2) / th;
        y3 += (z.m + bbar).powi(2) * th;
        y4 += (z.m + bbar) * th;
        d1 += th * 0.5 * (b[i] * s.t[i].cos() + b[j] * s.t[j].cos());
        d1s += th * 0.5 * (b[i] * s.t[i].sin() + b[j] * s.t[j].sin());
        bsum += bbar * th;
        bsq += bbar * bbar * th;
    }
    let d1 = d1 / PI.sqrt();
    let d1_star = d1s / PI.sqrt();
    let cal_e2 = d1 * d1 + d1_star * d1_star;
    Ok(SurfaceStatistics {
        n,
        y0: tilt_weight(s, &z.params)?.y0_hat,
        y1: s.cubic_sum(),
        y2,
        y3,
        y4,
        d1,
        d1_star,
        chi: bsq - cal_e2,
        cal_e1: y4 * y4 / (2.0 * PI),
        cal_e2,
        cal_e3: bsum * bsum / (2.0 * PI),
        bbar_sum: bsum,
        bbar_sq_sum: bsq,
    })
}

/// χ = E₁ + E₂ + E₃ split against the continuous path functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiDecomposition {
    /// Σ B̄_i² Θ_i − ∫ B².
    pub e1: f64,
    /// ∫ B² − A₁² − A₁*².
    pub e2: f64,
    /// A₁² + A₁*² − D₁² − D₁*².
    pub e3: f64,
}

/// Splits χ of a configuration whose bridge values come from `path`.
pub fn chi_decomposition(stats: &SurfaceStatistics, path: &KlPath) -> ChiDecomposition {
    let l2 = path.l2_norm_sq();
    let (a1, a1s) = if path.order() > 0 {
        (path.a[0], path.a_star[0])
    } else {
        (0.0, 0.0)
    };
    let first = a1 * a1 + a1s * a1s;
    ChiDecomposition {
        e1: stats.bbar_sq_sum - l2,
        e2: l2 - first,
        e3: first - stats.cal_e2,
    }
}
