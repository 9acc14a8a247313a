//! Model parameters, closed-form constants and the renewal law q*.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bisect_secant, CompositeGaussLegendre};

/// Interaction ratio κ, inverse temperature β and torus side L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kappa: f64,
    pub beta: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl ModelParams {
    /// Validated parameters: κ > 1, β > 0, L > 4 and L/2 > R_c(κ).
    pub fn new(kappa: f64, beta: f64, l: f64) -> Result<Self> {
        let p = Self { kappa, beta, l };
        p.validate()?;
        Ok(p)
    }

    /// Checks the standing assumptions on the parameters.
    pub fn validate(&self) -> Result<()> {
        let rc = critical_radius(self.kappa)?;
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Domain(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.l > 4.0) || !self.l.is_finite() {
            return Err(Error::Domain(format!("L must exceed 4, got {}", self.l)));
        }
        if !(self.l / 2.0 > rc) {
            return Err(Error::Domain(format!(
                "L/2 = {} must exceed the critical radius {}",
                self.l / 2.0,
                rc
            )));
        }
        Ok(())
    }

    /// Activity z = κβ e^{−4πβ} of the metastable regime.
    pub fn activity(&self) -> f64 {
        self.kappa * self.beta * (-4.0 * PI * self.beta).exp()
    }

    /// Torus area L².
    pub fn torus_area(&self) -> f64 {
        self.l * self.l
    }
}

/// Closed-form constants derived from (κ, β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub r_c: f64,
    pub phi: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub g_kappa: f64,
    pub lambda_beta: f64,
    pub v0: f64,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 1.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("kappa must exceed 1, got {kappa}")))
    }
}

/// Critical radius 2κ/(κ−1).
pub fn critical_radius(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(2.0 * kappa / (kappa - 1.0))
}

/// Disc rate function πR² − κπ(R−2)² for R ≥ 2.
pub fn phi_profile(kappa: f64, r: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if !(r >= 2.0) {
        return Err(Error::Domain(format!("radius must be at least 2, got {r}")));
    }
    Ok(PI * r * r - kappa * PI * (r - 2.0).powi(2))
}

/// Critical energy 4πκ/(κ−1), the maximum of the disc rate function.
pub fn phi_critical(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(4.0 * PI * kappa / (kappa - 1.0))
}

/// Angular intensity factor (2κ)^{2/3}/(κ−1).
pub fn g_kappa(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok((2.0 * kappa).powf(2.0 / 3.0) / (kappa - 1.0))
}

/// First expansion coefficient R_c²(R_c−2)/48.
pub fn c1_from_radius(kappa: f64) -> Result<f64> {
    let rc = critical_radius(kappa)?;
    Ok(rc * rc * (rc - 2.0) / 48.0)
}

/// All derived constants for valid parameters.
pub fn derived_constants(params: &ModelParams) -> DerivedConstants {
    let k = params.kappa;
    let r_c = 2.0 * k / (k - 1.0);
    let g = (2.0 * k).powf(2.0 / 3.0) / (k - 1.0);
    DerivedConstants {
        r_c,
        phi: 4.0 * PI * k / (k - 1.0),
        c1: k * k / (6.0 * (k - 1.0).powi(3)),
        c2: r_c,
        c3: (k - 1.0) / 2.0,
        g_kappa: g,
        lambda_beta: g * params.beta.cbrt(),
        v0: 4.0 * PI,
    }
}

/// The kernel √(2πu)·exp(−τu − u³/24); a probability density at τ = τ*.
pub fn q_star_density(u: f64, tau: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    (2.0 * PI * u).sqrt() * (-tau * u - u * u * u / 24.0).exp()
}

/// Quadrature settings for integrals against q*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Upper cutoff of the integration range in u.
    pub u_max: f64,
    /// Number of equal panels.
    pub panels: usize,
    /// Gauss-Legendre nodes per panel.
    pub order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            u_max: 40.0,
            panels: 200,
            order: 10,
        }
    }
}

impl QuadratureSpec {
    /// The same rule with twice as many panels.
    pub fn refined(&self) -> Self {
        Self {
            panels: self.panels * 2,
            ..*self
        }
    }

    /// ∫₀^{u_max} g(u) du.
    ///
    /// Integrates in w = √u so that the √u endpoint behaviour becomes smooth.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let rule = CompositeGaussLegendre::new(self.panels, self.order);
        rule.integrate(0.0, self.u_max.sqrt(), |w| 2.0 * w * g(w * w))
    }
}

/// The tilted interarrival law with its first two moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalLaw {
    pub tau_star: f64,
    pub mu_star: f64,
    pub sigma2: f64,
    pub spec: QuadratureSpec,
}

impl RenewalLaw {
    /// Density q*(u) at the solved tilt.
    pub fn density(&self, u: f64) -> f64 {
        q_star_density(u, self.tau_star)
    }
}

/// ∫₀^∞ √(2πu) e^{−τu−u³/24} du.
pub fn renewal_integral(tau: f64, spec: &QuadratureSpec) -> f64 {
    spec.integrate(|u| q_star_density(u, tau))
}

/// Solves ∫ q(u; τ) du = 1 for τ on the bracket [0, 10] and computes the moments.
pub fn solve_tau_star(tol: f64, spec: &QuadratureSpec) -> Result<RenewalLaw> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let residual = |t: f64| renewal_integral(t, spec) - 1.0;
    let tau = bisect_secant(residual, 0.0, 10.0, 1e-15, tol * 1e-3, 400)?;
    let r = residual(tau);
    if r.abs() >= tol {
        return Err(Error::Numeric(format!(
            "tau* residual {r} exceeds tolerance {tol}"
        )));
    }
    let mut law = RenewalLaw {
        tau_star: tau,
        mu_star: 0.0,
        sigma2: 0.0,
        spec: *spec,
    };
    let (mu, s2) = renewal_moments(&law);
    law.mu_star = mu;
    law.sigma2 = s2;
    Ok(law)
}

/// Mean and variance of q* by the law's quadrature rule.
pub fn renewal_moments(law: &RenewalLaw) -> (f64, f64) {
    let t = law.tau_star;
    let m1 = law.spec.integrate(|u| u * q_star_density(u, t));
    let m2 = law.spec.integrate(|u| u * u * q_star_density(u, t));
    (m1, m2 - m1 * m1)
}

/// The renewal law with default quadrature and tolerance 1e−12.
pub fn default_renewal_law() -> RenewalLaw {
    solve_tau_star(1e-12, &QuadratureSpec::default()).expect("tau* solve on the default grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn critical_radius_values() {
        assert_eq!(critical_radius(2.0).unwrap(), 4.0);
        assert_eq!(critical_radius(3.0).unwrap(), 3.0);
        assert_abs_diff_eq!(critical_radius(1e6).unwrap(), 2.000002, epsilon = 1e-8);
        assert!(critical_radius(1.0).is_err());
        assert!(critical_radius(0.5).is_err());
    }

    #[test]
    fn phi_profile_values() {
        assert_abs_diff_eq!(phi_profile(2.0, 4.0).unwrap(), 8.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(phi_profile(2.0, 4.0).unwrap(), 25.13274, epsilon = 1e-5);
        for k in [1.1, 2.0, 7.5] {
            assert_abs_diff_eq!(phi_profile(k, 2.0).unwrap(), 4.0 * PI, epsilon = 1e-12);
            let rc = critical_radius(k).unwrap();
            assert_abs_diff_eq!(
                phi_profile(k, rc).unwrap(),
                phi_critical(k).unwrap(),
                epsilon = 1e-10
            );
        }
        let h = 1e-5;
        let d =
            (phi_profile(2.0, 4.0 + h).unwrap() - phi_profile(2.0, 4.0 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-8);
        assert!(phi_profile(2.0, 1.99).is_err());
    }

    #[test]
    fn derived_constants_at_kappa_two() {
        let p = ModelParams::new(2.0, 1000.0, 10.0).unwrap();
        let c = derived_constants(&p);
        assert_abs_diff_eq!(c.c1, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(c.c2, 4.0);
        assert_eq!(c.c3, 0.5);
        assert_abs_diff_eq!(c.g_kappa, 2.5198421, epsilon = 1e-7);
        assert_abs_diff_eq!(c.lambda_beta, 25.198421, epsilon = 1e-6);
        assert_abs_diff_eq!(c.v0, 4.0 * PI, epsilon = 0.0);
        assert_abs_diff_eq!(c.c1, c.g_kappa.powi(3) / 24.0, epsilon = 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2.0, 1.0, 10.0).is_ok());
        assert!(ModelParams::new(0.5, 1.0, 10.0).is_err());
        assert!(ModelParams::new(2.0, 1.0, 7.0).is_err());
        assert!(ModelParams::new(2.0, 0.0, 10.0).is_err());
        assert!(ModelParams::new(100.0, 1.0, 4.0).is_err());
        let p = ModelParams::new(2.0, 0.5, 10.0).unwrap();
        assert_abs_diff_eq!(p.activity(), (-2.0 * PI).exp(), epsilon = 1e-15);
    }

    #[test]
    fn q_star_vanishes_at_origin() {
        for tau in [-1.0, 0.0, 1.6, 5.0] {
            assert_eq!(q_star_density(0.0, tau), 0.0);
        }
    }

    #[test]
    fn untilted_integral_is_four_pi_over_root_three() {
        let v = renewal_integral(0.0, &QuadratureSpec::default());
        assert_abs_diff_eq!(v, 4.0 * PI / 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn tau_star_solution_properties() {
        let spec = QuadratureSpec::default();
        let law = solve_tau_star(1e-12, &spec).unwrap();
        assert!(law.tau_star > 0.0);
        let refined = spec.refined();
        assert!((renewal_integral(law.tau_star, &refined) - 1.0).abs() < 1e-10);
        let t = law.tau_star;
        assert!(renewal_integral(t + 1.0, &spec) < 1.0);
        assert!(renewal_integral(t - t.min(1.0) / 2.0, &spec) > 1.0);
        let law2 = solve_tau_star(1e-12, &refined).unwrap();
        assert!((law.tau_star - law2.tau_star).abs() < 1e-8);
        assert!((law.mu_star - law2.mu_star).abs() < 1e-8);
        assert!((law.sigma2 - law2.sigma2).abs() < 1e-8);
        assert!(law.sigma2 > 0.0);
        let untilted_mean = spec.integrate(|u| u * q_star_density(u, 0.0));
        assert!(law.mu_star < untilted_mean);
        assert_eq!(solve_tau_star(1e-12, &spec).unwrap(), law);
        assert!(solve_tau_star(0.0, &spec).is_err());
    }

    #[test]
    fn phi_profile_is_concave_with_maximum_at_critical_radius() {
        for k in [1.2, 2.0, 5.0] {
            let rc = critical_radius(k).unwrap();
            let h = 1e-3;
            let mut best = (f64::NEG_INFINITY, 0.0);
            let mut r = 2.0 + h;
            while r < 3.0 * rc {
                let second = (phi_profile(k, r + h).unwrap() - 2.0 * phi_profile(k, r).unwrap()
                    + phi_profile(k, r - h).unwrap())
                    / (h * h);
                assert!(second < 0.0);
                let v = phi_profile(k, r).unwrap();
                if v > best.0 {
                    best = (v, r);
                }
                r += h;
            }
            assert_relative_eq!(best.1, rc, epsilon = 2e-3);
        }
    }

    proptest! {
        #[test]
        fn c1_forms_agree(kappa in 1.0001f64..100.0) {
            let p = ModelParams { kappa, beta: 1.0, l: 1e6 };
            let c = derived_constants(&p);
            let from_radius = c1_from_radius(kappa).unwrap();
            prop_assert!((c.c1 - c.g_kappa.powi(3) / 24.0).abs() <= 1e-12 * c.c1);
            prop_assert!((c.c1 - from_radius).abs() <= 1e-12 * c.c1);
        }
    }
}
