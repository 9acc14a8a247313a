//! The renewal series for E[exp(Y₀ − βC₁Y₁)] and its β^{1/3} asymptotics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_constants::{g_kappa, q_star_density, RenewalLaw};
use crate::numerics::{linear_fit, log_sum_exp, CompositeGaussLegendre};

/// Gaps beyond this carry q*-mass below e^{−110}.
pub(crate) const GAP_CUTOFF: f64 = 14.0;

/// Lattice nodes per mean interarrival μ*.
pub const NODES_PER_MEAN: usize = 64;

/// Relative change of the extrapolated limit under grid halving that is accepted.
pub const REFINEMENT_TOLERANCE: f64 = 5e-3;

/// (1/β^{1/3}) log E[exp(Y₀ − βC₁Y₁)] along a β grid, with its extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalSeriesResult {
    pub betas: Vec<f64>,
    /// (1/β^{1/3}) log E at each β.
    pub values: Vec<f64>,
    /// log E at each β.
    pub log_expectations: Vec<f64>,
    /// log of the n = 0 term, −2πG_κβ^{1/3}.
    pub log_empty_terms: Vec<f64>,
    /// Intercept of the fit of `values` against β^{−1/3}.
    pub extrapolated: f64,
    /// The same intercept on the grid with half the step.
    pub refined_extrapolated: f64,
    /// −2πG_κ(1 − τ*).
    pub predicted: f64,
    /// Lattice step in units of the rescaled gap u = λΘ.
    pub grid_step: f64,
}

/// log E[exp(Ŷ₀ − Ŷ₁)] for the Poisson angular process at intensity G_κβ^{1/3}.
///
/// In the rescaled variable u = G_κβ^{1/3}Θ the series reads
/// e^{−ℓ}[1 + Σ_n (ℓ/n) g^{*n}(ℓ)] with ℓ = 2πG_κβ^{1/3} and g(u) = e^{τ*u}q*(u).
/// The gaps are discretised on a lattice of step ≈ `step` carrying the exact
/// cell masses of q*, and the sum over n is evaluated through the renewal
/// identity Σ_n P(S_n = ℓ)/n = ℓ^{−1} Σ_j x_j Q_j U(ℓ − x_j), where U is the
/// renewal mass function including n = 0.
pub fn renewal_log_expectation(kappa: f64, beta: f64, law: &RenewalLaw, step: f64) -> Result<f64> {
    if !(beta > 0.0) || !(step > 0.0) {
        return Err(Error::Domain(format!(
            "need beta > 0 and step > 0, got {beta}, {step}"
        )));
    }
    let ell = 2.0 * PI * g_kappa(kappa)? * beta.cbrt();
    let m = (ell / step).ceil().max(1.0) as usize;
    let h = ell / m as f64;
    let masses = cell_masses(law.tau_star, h, m);
    let j_max = masses.len() - 1;
    let norm = 1.0 - masses[0];
    let mut u = vec![0.0; m + 1];
    u[0] = 1.0 / norm;
    for k in 1..=m {
        let top = k.min(j_max);
        let mut acc = 0.0;
        for j in 1..=top {
            acc += masses[j] * u[k - j];
        }
        u[k] = acc / norm;
    }
    let size_biased: f64 = (1..=m.min(j_max))
        .map(|j| j as f64 * masses[j] * u[m - j])
        .sum();
    if !(size_biased > 0.0) || !size_biased.is_finite() {
        return Err(Error::Numeric(format!(
            "renewal sum {size_biased} at beta {beta}"
        )));
    }
    Ok(-ell + log_sum_exp(&[0.0, law.tau_star * ell + size_biased.ln()]))
}

/// Q_j = ∫ q* over [(j − ½)h, (j + ½)h] ∩ [0, ∞) for j up to the gap cutoff.
fn cell_masses(tau: f64, h: f64, m: usize) -> Vec<f64> {
    let j_max = ((GAP_CUTOFF / h).ceil() as usize).min(m).max(1);
    let rule = CompositeGaussLegendre::new(1, 12);
    let mut masses = Vec::with_capacity(j_max + 1);
    // The first cell has the √u endpoint; integrate it in w = √u.
    let w_top = (0.5 * h).sqrt();
    masses.push(rule.integrate(0.0, w_top, |w| 2.0 * w * q_star_density(w * w, tau)));
    for j in 1..=j_max {
        let (a, b) = ((j as f64 - 0.5) * h, (j as f64 + 0.5) * h);
        masses.push(rule.integrate(a, b, |x| q_star_density(x, tau)));
    }
    masses
}

fn extrapolate(betas: &[f64], values: &[f64]) -> Result<f64> {
    let x: Vec<f64> = betas.iter().map(|b| 1.0 / b.cbrt()).collect();
    Ok(linear_fit(&x, values)?.intercept)
}

/// Evaluates the series along an increasing β grid and extrapolates
/// (1/β^{1/3}) log E to β → ∞ linearly in β^{−1/3}.
///
/// The whole computation is repeated with half the lattice step; a relative
/// change of the limit above [`REFINEMENT_TOLERANCE`] is a numeric error.
pub fn renewal_expectation_series(
    kappa: f64,
    beta_grid: &[f64],
    law: &RenewalLaw,
) -> Result<RenewalSeriesResult> {
    if beta_grid.len() < 4 {
        return Err(Error::Domain(format!(
            "extrapolation needs at least 4 beta values, got {}",
            beta_grid.len()
        )));
    }
    if beta_grid.windows(2).any(|w| !(w[1] > w[0])) || !(beta_grid[0] > 0.0) {
        return Err(Error::Domain(
            "beta grid must be positive and increasing".into(),
        ));
    }
    let g = g_kappa(kappa)?;
    let step = law.mu_star / NODES_PER_MEAN as f64;
    let run = |h: f64| -> Result<Vec<f64>> {
        beta_grid
            .iter()
            .map(|&b| renewal_log_expectation(kappa, b, law, h))
            .collect()
    };
    let logs = run(step)?;
    let fine = run(0.5 * step)?;
    let scaled =
        |v: &[f64]| -> Vec<f64> { v.iter().zip(beta_grid).map(|(l, b)| l / b.cbrt()).collect() };
    let values = scaled(&logs);
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite series value {v}")));
    }
    let extrapolated = extrapolate(beta_grid, &values)?;
    let refined_extrapolated = extrapolate(beta_grid, &scaled(&fine))?;
    let change = ((refined_extrapolated - extrapolated) / extrapolated).abs();
    if change > REFINEMENT_TOLERANCE {
        return Err(Error::Numeric(format!(
            "lattice refinement moves the limit by {change:.2e}"
        )));
    }
    Ok(RenewalSeriesResult {
        betas: beta_grid.to_vec(),
        values,
        log_expectations: logs,
        log_empty_terms: beta_grid.iter().map(|b| -2.0 * PI * g * b.cbrt()).collect(),
        extrapolated,
        refined_extrapolated,
        predicted: -2.0 * PI * g * (1.0 - law.tau_star),
        grid_step: step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_constants::default_renewal_law;

    /// Σ_n P(S_n = M)/n by explicit convolution powers of the lattice law.
    fn direct_sum(masses: &[f64], m: usize) -> f64 {
        let mut power = vec![0.0; m + 1];
        power[0] = 1.0;
        let mut total = 0.0;
        for n in 1..=20 * m {
            let mut next = vec![0.0; m + 1];
            for k in 0..=m {
                let mut acc = 0.0;
                for (j, q) in masses.iter().enumerate().take(k + 1) {
                    acc += q * power[k - j];
                }
                next[k] = acc;
            }
            power = next;
            total += power[m] / n as f64;
            if power.iter().sum::<f64>() < 1e-18 {
                break;
            }
        }
        total
    }

    #[test]
    fn renewal_identity_matches_convolution_powers() {
        let law = default_renewal_law();
        let (kappa, beta): (f64, f64) = (2.0, 0.5);
        let ell = 2.0 * PI * g_kappa(kappa).unwrap() * beta.cbrt();
        let step = 0.05;
        let m = (ell / step).ceil() as usize;
        let h = ell / m as f64;
        let masses = cell_masses(law.tau_star, h, m);
        let direct = direct_sum(&masses, m);
        let series = -ell + (1.0 + (law.tau_star * ell).exp() * m as f64 * direct).ln();
        let via_identity = renewal_log_expectation(kappa, beta, &law, step).unwrap();
        assert!(
            (series - via_identity).abs() < 1e-10,
            "{series} vs {via_identity}"
        );
    }

    #[test]
    fn cell_masses_sum_to_one() {
        let law = default_renewal_law();
        let masses = cell_masses(law.tau_star, 0.01, 10_000);
        assert!((masses.iter().sum::<f64>() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn dominates_the_empty_configuration_term() {
        let law = default_renewal_law();
        for beta in [0.01, 1.0, 100.0] {
            let ell = 2.0 * PI * g_kappa(2.0).unwrap() * f64::cbrt(beta);
            let v = renewal_log_expectation(2.0, beta, &law, 0.02).unwrap();
            assert!(v > -ell);
        }
    }

    #[test]
    fn grid_validation() {
        let law = default_renewal_law();
        assert!(renewal_expectation_series(2.0, &[1.0, 2.0, 3.0], &law).is_err());
        assert!(renewal_expectation_series(2.0, &[1.0, 3.0, 2.0, 4.0], &law).is_err());
    }
}
