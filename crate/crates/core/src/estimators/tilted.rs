//! Self-normalised importance sampling under the tilted angular law.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::renewal::GAP_CUTOFF;
use crate::error::{Error, Result};
use crate::model_constants::{g_kappa, q_star_density, ModelParams, RenewalLaw};
use crate::numerics::CompositeGaussLegendre;
use crate::processes::{sample_angular, tilt_weight, AngularSample};

const TWO_PI: f64 = 2.0 * PI;

/// Weight sets with an effective sample size below this are flagged.
pub const DEGENERATE_ESS: f64 = 10.0;

const SURVIVAL_STEP: f64 = 1e-3;

/// Sampler for the interarrival law q* with its survival function.
#[derive(Debug, Clone)]
pub struct GapSampler {
    tau: f64,
    gamma: Gamma<f64>,
    /// log Q̄ on the grid k·SURVIVAL_STEP.
    log_survival: Vec<f64>,
}

impl GapSampler {
    pub fn new(law: &RenewalLaw) -> Result<Self> {
        let tau = law.tau_star;
        let gamma = Gamma::new(1.5, 1.0 / tau).map_err(|e| Error::Numeric(e.to_string()))?;
        let cells = (GAP_CUTOFF / SURVIVAL_STEP).round() as usize;
        let rule = CompositeGaussLegendre::new(1, 10);
        let mut tail = vec![0.0; cells + 1];
        for k in (0..cells).rev() {
            let (a, b) = (k as f64 * SURVIVAL_STEP, (k + 1) as f64 * SURVIVAL_STEP);
            let mass = if k == 0 {
                rule.integrate(0.0, b.sqrt(), |w| 2.0 * w * q_star_density(w * w, tau))
            } else {
                rule.integrate(a, b, |u| q_star_density(u, tau))
            };
            tail[k] = tail[k + 1] + mass;
        }
        let total = tail[0];
        let log_survival = tail
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                if t > 0.0 {
                    (t / total).ln()
                } else {
                    let u = k as f64 * SURVIVAL_STEP;
                    q_star_density(u, tau).ln() - (tau + u * u / 8.0).ln()
                }
            })
            .collect();
        Ok(Self {
            tau,
            gamma,
            log_survival,
        })
    }

    /// One draw from q*, by rejection from the Gamma(3/2, τ*) law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u = self.gamma.sample(rng);
            if rng.random::<f64>() < (-u * u * u / 24.0).exp() {
                return u;
            }
        }
    }

    /// log Q̄(u) = log ∫_u^∞ q*.
    pub fn log_survival(&self, u: f64) -> f64 {
        let x = u / SURVIVAL_STEP;
        let k = x.floor() as usize;
        if k + 1 >= self.log_survival.len() {
            return q_star_density(u, self.tau).ln() - (self.tau + u * u / 8.0).ln();
        }
        let f = x - k as f64;
        (1.0 - f) * self.log_survival[k] + f * self.log_survival[k + 1]
    }

    /// Q̄(u)/q*(u), the inverse hazard rate.
    pub fn inverse_hazard(&self, u: f64) -> f64 {
        (self.log_survival(u) - q_star_density(u, self.tau).ln()).exp()
    }
}

/// How angular samples are proposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TiltProposal {
    /// The Poisson law itself, weighted by exp(Ŷ₀ − Ŷ₁).
    Poisson,
    /// Cyclic renewal configurations with q* gaps from a uniform start.
    Renewal,
}

/// A self-normalised importance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltedEstimate {
    pub estimate: f64,
    /// Jackknife standard error.
    pub stderr: f64,
    /// (Σw)²/Σw².
    pub ess: f64,
    pub replicas: usize,
    /// ESS below [`DEGENERATE_ESS`].
    pub degenerate: bool,
}

/// A renewal-proposal configuration in the rescaled variable u = λΘ.
pub(crate) struct RenewalDraw {
    pub sample: AngularSample,
    /// log of the weight relative to the tilted Poisson measure, up to the
    /// constant log ℓ + (τ* − 1)ℓ.
    pub log_rel_weight: f64,
}

/// Angles s + S_k/λ for a uniform start s and partial sums S_k < ℓ of q* gaps.
///
/// The density of the point set is ℓ^{−1} Π q*(u_i) Σ_i Q̄(u_i)/q*(u_i) over
/// its cyclic gaps u_i, so the tilted weight is proportional to 1/Σ_i Q̄(u_i)/q*(u_i).
pub(crate) fn renewal_draw<R: Rng + ?Sized>(
    gaps: &GapSampler,
    lambda: f64,
    rng: &mut R,
) -> Result<RenewalDraw> {
    let ell = TWO_PI * lambda;
    let start = rng.random_range(0.0..TWO_PI);
    let mut partial = vec![0.0];
    let mut sum = 0.0;
    let mut hazard = 0.0;
    loop {
        let u = gaps.sample(rng);
        if sum + u >= ell {
            hazard += gaps.inverse_hazard(ell - sum);
            break;
        }
        hazard += gaps.inverse_hazard(u);
        sum += u;
        partial.push(sum);
    }
    let mut t: Vec<f64> = partial
        .iter()
        .map(|s| (start + s / lambda).rem_euclid(TWO_PI))
        .map(|t| if t >= TWO_PI { 0.0 } else { t })
        .collect();
    t.sort_by(f64::total_cmp);
    Ok(RenewalDraw {
        sample: AngularSample::from_times(t)?,
        log_rel_weight: -hazard.ln(),
    })
}

/// Summary of weighted values with a fixed extra atom (weight a0, value f0).
pub(crate) fn weighted_summary(log_w: &[f64], f: &[f64], log_a0: f64, f0: f64) -> TiltedEstimate {
    let n = log_w.len();
    let top = log_w.iter().cloned().fold(log_a0, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
    // The atom stands for an expectation per replica, so it enters with weight n.
    let a0 = (log_a0 - top).exp() * n as f64;
    let sw: f64 = w.iter().sum();
    let swf: f64 = w.iter().zip(f).map(|(w, f)| w * f).sum();
    let estimate = (a0 * f0 + swf) / (a0 + sw);
    let ess = sw * sw / w.iter().map(|w| w * w).sum::<f64>();
    let stderr = if n > 1 {
        let loo: Vec<f64> = (0..n)
            .map(|i| {
                let scale = (n - 1) as f64 / n as f64;
                (a0 * scale * f0 + swf - w[i] * f[i]) / (a0 * scale + sw - w[i])
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / n as f64;
        ((n - 1) as f64 / n as f64 * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
    } else {
        f64::INFINITY
    };
    TiltedEstimate {
        estimate,
        stderr,
        ess,
        replicas: n,
        degenerate: !(ess >= DEGENERATE_ESS),
    }
}

/// Estimates the tilted expectation Ê[f] = E[e^{Ŷ₀−Ŷ₁} f]/E[e^{Ŷ₀−Ŷ₁}] of a
/// statistic of the angular sample.
///
/// With the renewal proposal the empty configuration, which the proposal
/// never produces, enters exactly with its tilted mass e^{−ℓ}.
pub fn tilted_expect_mc<F, R>(
    mut f: F,
    params: &ModelParams,
    law: &RenewalLaw,
    proposal: TiltProposal,
    replicas: usize,
    rng: &mut R,
) -> Result<TiltedEstimate>
where
    F: FnMut(&AngularSample) -> f64,
    R: Rng + ?Sized,
{
    if replicas == 0 {
        return Err(Error::Domain("at least one replica is needed".into()));
    }
    let lambda = g_kappa(params.kappa)? * params.beta.cbrt();
    let mut log_w = Vec::with_capacity(replicas);
    let mut vals = Vec::with_capacity(replicas);
    match proposal {
        TiltProposal::Poisson => {
            for _ in 0..replicas {
                let s = sample_angular(lambda, rng)?;
                log_w.push(tilt_weight(&s, params)?.log_weight);
                vals.push(f(&s));
            }
            Ok(weighted_summary(&log_w, &vals, f64::NEG_INFINITY, 0.0))
        }
        TiltProposal::Renewal => {
            let gaps = GapSampler::new(law)?;
            let ell = TWO_PI * lambda;
            for _ in 0..replicas {
                let d = renewal_draw(&gaps, lambda, rng)?;
                log_w.push(d.log_rel_weight);
                vals.push(f(&d.sample));
            }
            let empty = AngularSample::from_times(Vec::new())?;
            let log_a0 = -ell - (ell.ln() + (law.tau_star - 1.0) * ell);
            Ok(weighted_summary(&log_w, &vals, log_a0, f(&empty)))
        }
    }
}
