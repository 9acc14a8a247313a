//! Contour-membership probabilities under the tilted law and the slope diagnostics built on them.
//!
//! Membership of a Z-configuration is a cyclic product of triplet indicators,
//! and its probability decays like exp(−c β^{1/3}). Plain sampling sees no
//! members beyond small β, so the probability is estimated by sequential Monte
//! Carlo: particles grow the configuration point by point (renewal gaps and
//! exact sequential bridge values), are killed when a completed triplet fails,
//! and are resampled when fewer than half survive. The product of survival
//! fractions is an unbiased estimate of the membership mass.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tilted::{renewal_draw, GapSampler};
use crate::contours::{angles_ordered, outer_intersection};
use crate::error::{Error, Result};
use crate::model_constants::{critical_radius, g_kappa, ModelParams, RenewalLaw};
use crate::numerics::{clopper_pearson_upper, linear_fit, log_sum_exp};
use crate::processes::SequentialBridge;
use crate::rng::replica;
use crate::torus_geometry::Vec2;

const TWO_PI: f64 = 2.0 * PI;

/// Default exponent offset δ of the conditional moment exp(½(1 + δ)χ).
pub const DEFAULT_CHI_DELTA: f64 = 0.1;

/// Independent particle systems used for the standard error.
pub const BATCHES: usize = 10;

/// Options for [`contour_membership_prob`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipOptions {
    /// δ of the conditional moment exp(½(1 + δ)χ).
    pub chi_delta: f64,
    /// Independent particle systems; `replicas` are split evenly among them.
    pub batches: usize,
    /// Confidence level of the bound reported when no particle survives.
    pub confidence: f64,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        Self {
            chi_delta: DEFAULT_CHI_DELTA,
            batches: BATCHES,
            confidence: 0.95,
        }
    }
}

/// Estimate of P̂(Z^{(m)} ∈ O) at one (m, β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipEstimate {
    pub m: f64,
    pub beta: f64,
    /// Total particle count.
    pub replicas: usize,
    pub estimate: f64,
    /// log of `estimate`, or of `upper_bound` when the estimate is zero.
    pub log_estimate: f64,
    pub stderr: f64,
    /// Effective sample size of the final particle weights, pooled over batches.
    pub ess: f64,
    /// Surviving particles at the end, summed over batches.
    pub survivors: usize,
    /// One-sided bound from the last surviving generation when no particle survives.
    pub upper_bound: Option<f64>,
    /// log Ê[exp(½(1 + δ)χ) | Z ∈ O], NaN when no particle survives.
    pub chi_log_moment: f64,
}

#[derive(Debug, Clone, Copy)]
struct Particle {
    bridge: SequentialBridge,
    /// Partial gap sum in u units.
    sum: f64,
    n: usize,
    z_first: Vec2,
    b_first: f64,
    /// Outer intersection of the first two circles.
    v_first: Option<Vec2>,
    z_last: Vec2,
    b_last: f64,
    t_last: f64,
    /// Outer intersection of the last two circles.
    v_last: Option<Vec2>,
    /// Σ Q̄(u)/q*(u) over the gaps so far.
    hazard: f64,
    /// Σ Θ_i B̄_i².
    bsq: f64,
    /// Σ Θ_i ½(B_i e^{iT_i} + B_{i+1} e^{iT_{i+1}}).
    d: Vec2,
    alive: bool,
    done: bool,
}

/// Geometry of one (m, β) run.
struct Setup {
    lambda: f64,
    ell: f64,
    ring: f64,
    scale: f64,
    m: f64,
}

impl Setup {
    fn new(m: f64, params: &ModelParams) -> Result<Self> {
        let lambda = g_kappa(params.kappa)? * params.beta.cbrt();
        Ok(Self {
            lambda,
            ell: TWO_PI * lambda,
            ring: critical_radius(params.kappa)? - 2.0,
            scale: 1.0 / ((params.kappa - 1.0) * params.beta).sqrt(),
            m,
        })
    }

    fn point(&self, t: f64, b: f64) -> Option<Vec2> {
        let r = self.ring + (self.m + b) * self.scale;
        (r > 0.0).then(|| Vec2::polar(r, t))
    }
}

fn interval_terms(p: &mut Particle, theta: f64, b0: f64, t0: f64, b1: f64, t1: f64) {
    let bbar = 0.5 * (b0 + b1);
    p.bsq += theta * bbar * bbar;
    let e0 = Vec2::polar(b0, t0);
    let e1 = Vec2::polar(b1, t1);
    p.d = p.d + (e0 + e1) * (0.5 * theta);
}

impl Particle {
    fn start<R: Rng + ?Sized>(setup: &Setup, rng: &mut R) -> Self {
        let bridge = SequentialBridge::new(rng);
        let b = bridge.value();
        let z = setup.point(0.0, b);
        Self {
            bridge,
            sum: 0.0,
            n: 1,
            z_first: z.unwrap_or_default(),
            b_first: b,
            v_first: None,
            z_last: z.unwrap_or_default(),
            b_last: b,
            t_last: 0.0,
            v_last: None,
            hazard: 0.0,
            bsq: 0.0,
            d: Vec2::default(),
            alive: z.is_some(),
            done: false,
        }
    }

    /// Adds one gap: either a new point, or the closing gap back to the first point.
    fn step<R: Rng + ?Sized>(
        &mut self,
        setup: &Setup,
        gaps: &GapSampler,
        rng: &mut R,
    ) -> Result<()> {
        let u = gaps.sample(rng);
        if self.sum + u >= setup.ell {
            let closing = setup.ell - self.sum;
            self.hazard += gaps.inverse_hazard(closing);
            let theta = TWO_PI - self.t_last;
            interval_terms(self, theta, self.b_last, self.t_last, self.b_first, TWO_PI);
            self.done = true;
            if self.n >= 3 {
                let v_close = outer_intersection(self.z_last, self.z_first, Vec2::default());
                self.alive = match (self.v_last, v_close, self.v_first) {
                    (Some(a), Some(b), Some(c)) => {
                        angles_ordered(a, b, self.z_last, Vec2::default())
                            && angles_ordered(b, c, self.z_first, Vec2::default())
                    }
                    _ => false,
                };
            }
            return Ok(());
        }
        self.hazard += gaps.inverse_hazard(u);
        self.sum += u;
        let t = self.sum / setup.lambda;
        let b = self.bridge.advance(t, rng)?;
        let Some(z) = setup.point(t, b) else {
            self.alive = false;
            return Ok(());
        };
        interval_terms(self, t - self.t_last, self.b_last, self.t_last, b, t);
        let v = outer_intersection(self.z_last, z, Vec2::default());
        if self.n == 1 {
            self.v_first = v;
        } else {
            self.alive = match (self.v_last, v) {
                (Some(a), Some(c)) => angles_ordered(a, c, self.z_last, Vec2::default()),
                _ => false,
            };
        }
        self.v_last = v;
        self.z_last = z;
        self.b_last = b;
        self.t_last = t;
        self.n += 1;
        Ok(())
    }

    fn chi(&self) -> f64 {
        self.bsq - self.d.norm2() / PI
    }
}

/// One particle system: log of the membership mass estimate E_Q[1/H · 1_O]
/// and the survivors' (log 1/H, χ).
struct SystemResult {
    log_mass: f64,
    survivors: Vec<(f64, f64)>,
    /// log Z before the generation in which all particles died.
    log_z_at_death: Option<f64>,
    particles: usize,
}

fn run_system<R: Rng + ?Sized>(
    setup: &Setup,
    gaps: &GapSampler,
    particles: usize,
    rng: &mut R,
) -> Result<SystemResult> {
    let mut pop: Vec<Particle> = (0..particles)
        .map(|_| Particle::start(setup, rng))
        .collect();
    let mut log_z = 0.0;
    loop {
        let alive = pop.iter().filter(|p| p.alive).count();
        if alive == 0 {
            return Ok(SystemResult {
                log_mass: f64::NEG_INFINITY,
                survivors: Vec::new(),
                log_z_at_death: Some(log_z),
                particles,
            });
        }
        if pop.iter().all(|p| p.done || !p.alive) {
            break;
        }
        if alive * 2 < particles {
            log_z += (alive as f64 / particles as f64).ln();
            let living: Vec<Particle> = pop.iter().filter(|p| p.alive).copied().collect();
            let offset: f64 = rng.random();
            pop = (0..particles)
                .map(|k| living[((k as f64 + offset) * alive as f64 / particles as f64) as usize])
                .collect();
        }
        let z_before = log_z;
        for p in pop.iter_mut().filter(|p| p.alive && !p.done) {
            p.step(setup, gaps, rng)?;
        }
        if pop.iter().all(|p| !p.alive) {
            return Ok(SystemResult {
                log_mass: f64::NEG_INFINITY,
                survivors: Vec::new(),
                log_z_at_death: Some(z_before),
                particles,
            });
        }
    }
    let survivors: Vec<(f64, f64)> = pop
        .iter()
        .filter(|p| p.alive)
        .map(|p| (-p.hazard.ln(), p.chi()))
        .collect();
    let logs: Vec<f64> = survivors.iter().map(|s| s.0).collect();
    let log_mass = log_z + log_sum_exp(&logs) - (particles as f64).ln();
    Ok(SystemResult {
        log_mass,
        survivors,
        log_z_at_death: None,
        particles,
    })
}

/// log E_Q[1/H] for the renewal proposal, with its relative standard error.
fn log_normaliser<R: Rng + ?Sized>(
    gaps: &GapSampler,
    lambda: f64,
    draws: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let logs: Vec<f64> = (0..draws)
        .map(|_| renewal_draw(gaps, lambda, rng).map(|d| d.log_rel_weight))
        .collect::<Result<_>>()?;
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let n = draws as f64;
    let mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok((top + mean.ln(), (var / n).sqrt() / mean))
}

/// Estimates P̂(Z^{(m)} ∈ O) with default options.
pub fn contour_membership_prob<R: Rng + ?Sized>(
    m: f64,
    params: &ModelParams,
    law: &RenewalLaw,
    replicas: usize,
    rng: &mut R,
) -> Result<MembershipEstimate> {
    contour_membership_prob_with(m, params, law, replicas, &MembershipOptions::default(), rng)
}

/// Estimates P̂(Z^{(m)} ∈ O) by sequential Monte Carlo over `options.batches`
/// independent particle systems.
pub fn contour_membership_prob_with<R: Rng + ?Sized>(
    m: f64,
    params: &ModelParams,
    law: &RenewalLaw,
    replicas: usize,
    options: &MembershipOptions,
    rng: &mut R,
) -> Result<MembershipEstimate> {
    if options.batches < 2 || replicas < 2 * options.batches {
        return Err(Error::Domain(format!(
            "need at least 2 batches of 2 particles, got {replicas} particles in {} batches",
            options.batches
        )));
    }
    let setup = Setup::new(m, params)?;
    let gaps = GapSampler::new(law)?;
    let per = replicas / options.batches;
    let systems: Vec<SystemResult> = (0..options.batches)
        .map(|_| run_system(&setup, &gaps, per, rng))
        .collect::<Result<_>>()?;
    let (log_norm, norm_rel_se) = log_normaliser(&gaps, setup.lambda, replicas, rng)?;

    // Each batch estimates E_Q[1/H · 1_O]; the empty configuration is never a member.
    let log_masses: Vec<f64> = systems.iter().map(|s| s.log_mass).collect();
    let top = log_masses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let nb = options.batches as f64;
    // ℓe^{(τ*−1)ℓ}E_Q[1/H] + e^{−ℓ} is the full tilted normalisation.
    let log_c = setup.ell.ln() + (law.tau_star - 1.0) * setup.ell;
    let log_den = log_sum_exp(&[log_c + log_norm, -setup.ell]);
    let survivors: usize = systems.iter().map(|s| s.survivors.len()).sum();

    let (estimate, stderr, log_estimate, upper_bound) = if top.is_finite() {
        let rel: Vec<f64> = log_masses.iter().map(|l| (l - top).exp()).collect();
        let mean = rel.iter().sum::<f64>() / nb;
        let var = rel.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nb - 1.0);
        let log_est = log_c + top + mean.ln() - log_den;
        let est = log_est.exp();
        let rel_se = ((var / nb).sqrt() / mean).hypot(norm_rel_se);
        (est, est * rel_se, log_est, None)
    } else {
        let bounds: Vec<f64> = systems
            .iter()
            .map(|s| {
                let z = s.log_z_at_death.unwrap_or(0.0);
                z + clopper_pearson_upper(0.0, s.particles as f64, options.confidence).ln()
            })
            .collect();
        let b = log_sum_exp(&bounds) - nb.ln();
        // The bound is on the surviving fraction; weights are bounded by their maximum.
        let log_bound = (b + log_c + log_norm - log_den).min(0.0);
        (0.0, 0.0, log_bound, Some(log_bound.exp()))
    };

    let mut pooled_w = Vec::with_capacity(survivors);
    let mut pooled_chi = Vec::with_capacity(survivors);
    for s in &systems {
        if s.survivors.is_empty() {
            continue;
        }
        let logs: Vec<f64> = s.survivors.iter().map(|v| v.0).collect();
        let z_b = s.log_mass - log_sum_exp(&logs);
        for &(lw, chi) in &s.survivors {
            pooled_w.push(z_b + lw);
            pooled_chi.push(chi);
        }
    }
    let (ess, chi_log_moment) = if pooled_w.is_empty() {
        (0.0, f64::NAN)
    } else {
        let top = pooled_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = pooled_w.iter().map(|l| (l - top).exp()).collect();
        let sw: f64 = w.iter().sum();
        let ess = sw * sw / w.iter().map(|x| x * x).sum::<f64>();
        let k = 0.5 * (1.0 + options.chi_delta);
        let terms: Vec<f64> = pooled_w
            .iter()
            .zip(&pooled_chi)
            .map(|(l, chi)| l + k * chi)
            .collect();
        (ess, log_sum_exp(&terms) - log_sum_exp(&pooled_w))
    };

    Ok(MembershipEstimate {
        m,
        beta: params.beta,
        replicas: per * options.batches,
        estimate,
        log_estimate,
        stderr,
        ess,
        survivors,
        upper_bound,
        chi_log_moment,
    })
}

/// One β of the decay, offset and χ-moment diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipRow {
    pub beta: f64,
    pub at_zero: MembershipEstimate,
    /// −log P̂(Z⁰ ∈ O)/β^{1/3}.
    pub decay_ratio: f64,
    /// The offset 0.1·β^{1/6} of the paired comparison.
    pub m_offset: f64,
    pub at_offset: MembershipEstimate,
    /// |log(P̂(Z^{(m)} ∈ O)/P̂(Z⁰ ∈ O))|/β^{1/3}.
    pub offset_log_ratio: f64,
}

/// Diagnostics along a β grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipDiagnostics {
    pub kappa: f64,
    pub rows: Vec<MembershipRow>,
    /// Slope of −log P̂(Z⁰ ∈ O) against β^{1/3}, an estimate of c**.
    pub decay_slope: f64,
    /// c**/(2πG_κ), the empirical τ**.
    pub tau_double_star: f64,
    /// 2πG_κ(τ* − τ**)(κ − 1)/κ^{2/3}.
    pub entropy_constant: f64,
}

/// Offset factor of the paired comparison m = factor·β^{1/6}.
pub const OFFSET_FACTOR: f64 = 0.1;

/// Runs the membership estimator at m = 0 and m = 0.1β^{1/6} for each β,
/// with paired seeds, and fits the decay slope.
pub fn membership_diagnostics(
    kappa: f64,
    beta_grid: &[f64],
    law: &RenewalLaw,
    replicas: usize,
    options: &MembershipOptions,
    seed: u64,
) -> Result<MembershipDiagnostics> {
    if beta_grid.len() < 2 {
        return Err(Error::Domain(
            "the slope needs at least two beta values".into(),
        ));
    }
    let g = g_kappa(kappa)?;
    let mut rows = Vec::with_capacity(beta_grid.len());
    for (k, &beta) in beta_grid.iter().enumerate() {
        let params = ModelParams::new(kappa, beta, 4.0 * critical_radius(kappa)? + 1.0)?;
        let m_offset = OFFSET_FACTOR * beta.powf(1.0 / 6.0);
        let at_zero = contour_membership_prob_with(
            0.0,
            &params,
            law,
            replicas,
            options,
            &mut replica(seed, k as u64),
        )?;
        let at_offset = contour_membership_prob_with(
            m_offset,
            &params,
            law,
            replicas,
            options,
            &mut replica(seed, k as u64),
        )?;
        let s = beta.cbrt();
        rows.push(MembershipRow {
            beta,
            at_zero,
            decay_ratio: -at_zero.log_estimate / s,
            m_offset,
            at_offset,
            offset_log_ratio: (at_offset.log_estimate - at_zero.log_estimate).abs() / s,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.beta.cbrt()).collect();
    let y: Vec<f64> = rows.iter().map(|r| -r.at_zero.log_estimate).collect();
    let decay_slope = linear_fit(&x, &y)?.slope;
    let tau_double_star = decay_slope / (TWO_PI * g);
    Ok(MembershipDiagnostics {
        kappa,
        rows,
        decay_slope,
        tau_double_star,
        entropy_constant: TWO_PI * g * (law.tau_star - tau_double_star) * (kappa - 1.0)
            / kappa.powf(2.0 / 3.0),
    })
}

/// Points, bridge values, angles, membership verdict and χ of a traced particle.
#[cfg(test)]
type Trace = (Vec<Vec2>, Vec<f64>, Vec<f64>, bool, f64);

/// Grows one configuration without resampling and returns its points, bridge
/// values, angles, the incremental membership verdict and the incremental χ.
#[cfg(test)]
pub(crate) fn trace_particle<R: Rng + ?Sized>(
    m: f64,
    params: &ModelParams,
    law: &RenewalLaw,
    rng: &mut R,
) -> Result<Option<Trace>> {
    let setup = Setup::new(m, params)?;
    let gaps = GapSampler::new(law)?;
    let mut p = Particle::start(&setup, rng);
    if !p.alive {
        return Ok(None);
    }
    let mut pts = vec![p.z_last];
    let mut bs = vec![p.b_last];
    let mut ts = vec![0.0];
    // Keep stepping after a failed triplet so the full configuration is produced.
    let mut verdict = p.alive;
    while !p.done {
        let before = p.n;
        p.alive = true;
        p.step(&setup, &gaps, rng)?;
        verdict &= p.alive;
        if p.n > before {
            pts.push(p.z_last);
            bs.push(p.b_last);
            ts.push(p.t_last);
        } else if !p.done {
            return Ok(None);
        }
    }
    Ok(Some((pts, bs, ts, verdict, p.chi())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::contour_membership;
    use crate::model_constants::default_renewal_law;
    use crate::processes::{build_z, surface_statistics, AngularSample};
    use crate::rng::seeded;

    #[test]
    fn incremental_verdict_and_chi_match_the_full_computation() {
        let law = default_renewal_law();
        let mut rng = seeded(5);
        let mut members = 0;
        let mut traced = 0;
        for (k, beta) in [0.05, 0.1, 0.3, 1.0, 10.0]
            .into_iter()
            .cycle()
            .take(800)
            .enumerate()
        {
            let p = ModelParams::new(2.0, beta, 20.0).unwrap();
            let m = if k % 2 == 0 { 0.0 } else { 0.3 };
            let Some((pts, bs, ts, verdict, chi)) = trace_particle(m, &p, &law, &mut rng).unwrap()
            else {
                continue;
            };
            traced += 1;
            assert_eq!(verdict, contour_membership(&pts), "config {k}");
            members += verdict as usize;
            let sample = AngularSample::from_times(ts).unwrap();
            let z = build_z(m, &sample, &bs, &p).unwrap();
            for (a, b) in z.points.iter().zip(&pts) {
                assert!(a.dist(*b) < 1e-12);
            }
            let stats = surface_statistics(&z).unwrap();
            assert!(
                (stats.chi - chi).abs() < 1e-9 * (1.0 + chi.abs()),
                "{} vs {chi}",
                stats.chi
            );
        }
        assert!(
            traced > 400 && members >= 5 && members < traced,
            "{members} of {traced}"
        );
    }

    #[test]
    fn smc_agrees_with_plain_sampling_where_members_are_common() {
        let law = default_renewal_law();
        let p = ModelParams::new(2.0, 0.3, 20.0).unwrap();
        let mut rng = seeded(6);
        let smc = contour_membership_prob(0.0, &p, &law, 20_000, &mut rng).unwrap();
        // Plain self-normalised estimate from fully grown configurations.
        let gaps = GapSampler::new(&law).unwrap();
        let setup = Setup::new(0.0, &p).unwrap();
        let (mut sw, mut swf, mut sw2) = (0.0, 0.0, 0.0);
        let draws = 20_000;
        let mut terms = Vec::with_capacity(draws);
        for _ in 0..draws {
            let mut q = Particle::start(&setup, &mut rng);
            let mut ok = q.alive;
            while !q.done {
                q.alive = true;
                q.step(&setup, &gaps, &mut rng).unwrap();
                ok &= q.alive;
            }
            let w = 1.0 / q.hazard;
            sw += w;
            sw2 += w * w;
            swf += w * ok as u8 as f64;
            terms.push((w, ok as u8 as f64));
        }
        let plain = swf / sw;
        let var: f64 = terms
            .iter()
            .map(|(w, f)| (w * (f - plain)).powi(2))
            .sum::<f64>()
            / (sw * sw);
        let se = var.sqrt().hypot(smc.stderr);
        assert!(sw2 > 0.0);
        assert!(
            (smc.estimate - plain).abs() < 4.0 * se,
            "{smc:?} vs {plain} ± {}",
            var.sqrt()
        );
        assert!(smc.upper_bound.is_none());
    }
}
