//! Birth-death Metropolis sampler of the grand-canonical particle model and
//! the small-system oracle for its particle-number distribution.
//!
//! The target density with respect to the Poisson reference measure is
//! (κβ)^N e^{−βV(γ)}, where V is the area of the union of radius-2 discs.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_constants::ModelParams;
use crate::numerics::{log_sum_exp, CompositeGaussLegendre};
use crate::torus_geometry::{lens_area, min_image, union_area, Configuration, TorusPoint, Vec2};

/// Steps between full recomputations of the cached volume.
pub const REVALIDATE_EVERY: u64 = 1_000;

/// Largest drift of the cached volume tolerated at a revalidation.
pub const REVALIDATE_TOL: f64 = 1e-9;

/// Chain state: configuration, cached volume and move statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsState {
    pub config: Configuration,
    /// V(γ) = |h(γ)|, maintained incrementally.
    pub volume: f64,
    pub steps: u64,
    pub births_proposed: u64,
    pub births_accepted: u64,
    pub deaths_proposed: u64,
    pub deaths_accepted: u64,
    /// Largest |cached − recomputed| volume seen at a revalidation.
    pub max_volume_drift: f64,
}

impl GibbsState {
    /// The chain started from `config`.
    pub fn new(config: Configuration) -> Self {
        let volume = union_area(&config);
        Self {
            config,
            volume,
            steps: 0,
            births_proposed: 0,
            births_accepted: 0,
            deaths_proposed: 0,
            deaths_accepted: 0,
            max_volume_drift: 0.0,
        }
    }

    /// The empty configuration on the torus of side `l`.
    pub fn empty(l: f64) -> Result<Self> {
        Ok(Self::new(Configuration::new(&[], l)?))
    }

    pub fn n(&self) -> usize {
        self.config.len()
    }
}

/// log of the unnormalised density N log(κβ) − βV with respect to the
/// unit-rate Poisson process on the torus.
pub fn log_density(n: usize, volume: f64, params: &ModelParams) -> f64 {
    n as f64 * (params.kappa * params.beta).ln() - params.beta * volume
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Acceptance probability of adding a point to an N-point configuration,
/// with ΔV = V(γ ∪ {x}) − V(γ).
pub fn birth_acceptance(n: usize, delta_v: f64, params: &ModelParams) -> f64 {
    let kbt = params.kappa * params.beta * params.torus_area();
    (kbt / (n as f64 + 1.0) * (-params.beta * delta_v).exp()).min(1.0)
}

/// Acceptance probability of removing a point from an N-point configuration,
/// with ΔV = V(γ ∖ {x}) − V(γ).
pub fn death_acceptance(n: usize, delta_v: f64, params: &ModelParams) -> f64 {
    let kbt = params.kappa * params.beta * params.torus_area();
    (n as f64 / kbt * (-params.beta * delta_v).exp()).min(1.0)
}

/// |B₂(x) ∖ h(others)|, from the discs within distance 4 of x.
fn exclusive_area(points: &[TorusPoint], skip: Option<usize>, x: Vec2, l: f64) -> f64 {
    let near: Vec<TorusPoint> = points
        .iter()
        .enumerate()
        .filter(|&(i, p)| Some(i) != skip && min_image(x, p.vec(), l).norm2() < 16.0)
        .map(|(_, p)| *p)
        .collect();
    if near.is_empty() {
        return 4.0 * PI;
    }
    let without = union_area(&Configuration {
        points: near.clone(),
        l,
    });
    let mut with = near;
    with.push(TorusPoint::new(x.x, x.y, l));
    union_area(&Configuration { points: with, l }) - without
}

/// One birth-death Metropolis move; births and deaths are proposed with probability ½ each.
pub fn gibbs_step<R: Rng + ?Sized>(state: &mut GibbsState, params: &ModelParams, rng: &mut R) {
    let l = state.config.l;
    let n = state.n();
    if rng.random::<bool>() {
        state.births_proposed += 1;
        let x = Vec2::new(rng.random_range(0.0..l), rng.random_range(0.0..l));
        let dv = exclusive_area(&state.config.points, None, x, l);
        if rng.random::<f64>() < birth_acceptance(n, dv, params) {
            state.config.points.push(TorusPoint::new(x.x, x.y, l));
            state.volume += dv;
            state.births_accepted += 1;
        }
    } else {
        state.deaths_proposed += 1;
        if n > 0 {
            let i = rng.random_range(0..n);
            let x = state.config.points[i].vec();
            let dv = -exclusive_area(&state.config.points, Some(i), x, l);
            if rng.random::<f64>() < death_acceptance(n, dv, params) {
                state.config.points.swap_remove(i);
                state.volume += dv;
                state.deaths_accepted += 1;
            }
        }
    }
    state.steps += 1;
    if state.steps % REVALIDATE_EVERY == 0 {
        let exact = union_area(&state.config);
        state.max_volume_drift = state.max_volume_drift.max((exact - state.volume).abs());
        state.volume = exact;
    }
}

/// Long-run particle-number statistics of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsRun {
    pub steps: u64,
    pub burn_in: u64,
    /// Fraction of recorded steps with N = n, for n = 0..probabilities.len().
    pub probabilities: Vec<f64>,
    /// Batch-means standard errors of `probabilities`.
    pub stderr: Vec<f64>,
    pub mean_n: f64,
    pub birth_acceptance_rate: f64,
    pub death_acceptance_rate: f64,
    pub max_volume_drift: f64,
    pub batches: usize,
}

/// Runs a chain from the empty configuration and records P(N = n) for n < `track`.
pub fn run_gibbs<R: Rng + ?Sized>(
    params: &ModelParams,
    steps: u64,
    burn_in: u64,
    track: usize,
    batches: usize,
    rng: &mut R,
) -> Result<GibbsRun> {
    if batches < 2 || steps < batches as u64 {
        return Err(Error::Domain(format!(
            "need at least 2 batches and one step per batch, got {steps} steps in {batches} batches"
        )));
    }
    let mut state = GibbsState::empty(params.l)?;
    for _ in 0..burn_in {
        gibbs_step(&mut state, params, rng);
    }
    let per = steps / batches as u64;
    let mut batch_freq = vec![vec![0.0; track]; batches];
    let mut total_n = 0.0;
    for freq in batch_freq.iter_mut() {
        let mut counts = vec![0u64; track];
        for _ in 0..per {
            gibbs_step(&mut state, params, rng);
            let n = state.n();
            total_n += n as f64;
            if n < track {
                counts[n] += 1;
            }
        }
        for (f, c) in freq.iter_mut().zip(counts) {
            *f = c as f64 / per as f64;
        }
    }
    let b = batches as f64;
    let mut probabilities = vec![0.0; track];
    let mut stderr = vec![0.0; track];
    for n in 0..track {
        let mean = batch_freq.iter().map(|f| f[n]).sum::<f64>() / b;
        let var = batch_freq
            .iter()
            .map(|f| (f[n] - mean).powi(2))
            .sum::<f64>()
            / (b - 1.0);
        probabilities[n] = mean;
        stderr[n] = (var / b).sqrt();
    }
    let rate = |a: u64, p: u64| if p == 0 { 0.0 } else { a as f64 / p as f64 };
    Ok(GibbsRun {
        steps: per * batches as u64,
        burn_in,
        probabilities,
        stderr,
        mean_n: total_n / (per * batches as u64) as f64,
        birth_acceptance_rate: rate(state.births_accepted, state.births_proposed),
        death_acceptance_rate: rate(state.deaths_accepted, state.deaths_proposed),
        max_volume_drift: state.max_volume_drift,
        batches,
    })
}

/// Share of the total weight allowed beyond the truncation point.
pub const TRUNCATION_TOL: f64 = 1e-3;

/// Normalised particle-number distribution from the partition-function terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallSystemOracle {
    pub n_max: usize,
    /// log w_n for n = 0..=n_max.
    pub log_weights: Vec<f64>,
    /// Relative standard errors of w_n (zero where w_n is exact).
    pub weight_rel_stderr: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Delta-method standard errors of `probabilities`.
    pub stderr: Vec<f64>,
    /// Upper bound on the omitted weight relative to the retained weight.
    pub tail_bound: f64,
    /// log Ξ from the retained terms.
    pub log_partition: f64,
    pub samples: usize,
}

/// w₂ = ((κβ)²/2)·|T|e^{−8πβ}[|T| + 2π∫₀⁴ r(e^{β·lens(r)} − 1) dr].
pub fn pair_weight(params: &ModelParams) -> f64 {
    let (kb, b, area) = (params.kappa * params.beta, params.beta, params.torus_area());
    let gl = CompositeGaussLegendre::new(32, 10);
    let inner = gl.integrate(0.0, 4.0, |r| r * (b * lens_area(r)).exp_m1());
    0.5 * kb * kb * area * (-8.0 * PI * b).exp() * (area + 2.0 * PI * inner)
}

/// Terms w_n = ((κβ)^n/n!)∫_{T^n} e^{−βV} of the partition function for
/// n ≤ `n_max`: exact for n ≤ 2, Monte Carlo with `samples` uniform
/// configurations for n ≥ 3. Fails when the omitted tail may exceed
/// [`TRUNCATION_TOL`] of the retained weight.
pub fn small_system_oracle<R: Rng + ?Sized>(
    params: &ModelParams,
    n_max: usize,
    samples: usize,
    rng: &mut R,
) -> Result<SmallSystemOracle> {
    if 4.0 * 2.0 >= params.l {
        return Err(Error::Domain("the pair term needs L > 8".into()));
    }
    let (b, area) = (params.beta, params.torus_area());
    let log_kbt = (params.kappa * b * area).ln();
    let mut log_w = vec![0.0, log_kbt - 4.0 * PI * b];
    let mut rel = vec![0.0, 0.0];
    if n_max >= 2 {
        log_w.push(pair_weight(params).ln());
        rel.push(0.0);
    }
    let l = params.l;
    for n in 3..=n_max {
        let mut vals = Vec::with_capacity(samples);
        for _ in 0..samples {
            let pts: Vec<TorusPoint> = (0..n)
                .map(|_| TorusPoint::new(rng.random_range(0.0..l), rng.random_range(0.0..l), l))
                .collect();
            vals.push(-b * union_area(&Configuration { points: pts, l }));
        }
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = vals.iter().map(|v| (v - top).exp()).collect();
        let s = samples as f64;
        let mean = e.iter().sum::<f64>() / s;
        let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s - 1.0).max(1.0);
        log_w.push(n as f64 * log_kbt - ln_factorial(n) + top + mean.ln());
        rel.push((var / s).sqrt() / mean);
    }
    let log_partition = log_sum_exp(&log_w);
    let m = n_max as f64 + 1.0;
    let log_kbt_ratio = log_kbt - (m + 1.0).ln();
    if log_kbt_ratio >= 0.0 {
        return Err(Error::Domain(format!(
            "truncation at n_max = {n_max} is below the weight peak"
        )));
    }
    // Σ_{n > n_max} (κβ|T|)^n/n! bounds the omitted weight since V ≥ 0.
    let log_tail = m * log_kbt - ln_factorial(n_max + 1) - (-log_kbt_ratio.exp()).ln_1p();
    let tail_bound = (log_tail - log_partition).exp();
    if tail_bound > TRUNCATION_TOL {
        return Err(Error::Domain(format!(
            "omitted weight beyond n_max = {n_max} may reach {tail_bound:.3e} of the total"
        )));
    }
    let probabilities: Vec<f64> = log_w.iter().map(|w| (w - log_partition).exp()).collect();
    let stderr = (0..log_w.len())
        .map(|k| {
            let p = probabilities[k];
            let var: f64 = (0..log_w.len())
                .map(|j| {
                    let d = if j == k {
                        p * (1.0 - p)
                    } else {
                        -p * probabilities[j]
                    };
                    (d * rel[j]).powi(2)
                })
                .sum();
            var.sqrt()
        })
        .collect();
    Ok(SmallSystemOracle {
        n_max,
        log_weights: log_w,
        weight_rel_stderr: rel,
        probabilities,
        stderr,
        tail_bound,
        log_partition,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use approx::assert_abs_diff_eq;

    fn params() -> ModelParams {
        ModelParams::new(2.0, 0.05, 10.0).unwrap()
    }

    #[test]
    fn first_moves_use_single_disc_volumes() {
        let p = params();
        let empty = Configuration::new(&[], 10.0).unwrap();
        assert_abs_diff_eq!(
            exclusive_area(&empty.points, None, Vec2::new(3.0, 4.0), 10.0),
            4.0 * PI
        );
        let expected = (p.kappa * p.beta * 100.0 * (-4.0 * PI * p.beta).exp()).min(1.0);
        assert_abs_diff_eq!(birth_acceptance(0, 4.0 * PI, &p), expected, epsilon = 1e-15);
        let one = Configuration::new(&[Vec2::new(1.0, 1.0)], 10.0).unwrap();
        let mut s = GibbsState::new(one);
        assert_abs_diff_eq!(s.volume, 4.0 * PI, epsilon = 1e-12);
        let x = s.config.points[0].vec();
        assert_abs_diff_eq!(
            -exclusive_area(&s.config.points, Some(0), x, 10.0),
            -4.0 * PI
        );
        s.volume = 0.0;
        s.steps = REVALIDATE_EVERY - 1;
        s.config.points.clear();
        gibbs_step(&mut s, &p, &mut seeded(1));
        assert_eq!(s.steps, REVALIDATE_EVERY);
    }

    #[test]
    fn detailed_balance_at_random_pairs() {
        let p = ModelParams::new(2.0, 0.3, 10.0).unwrap();
        let mut rng = seeded(2);
        for _ in 0..20 {
            let n = rng.random_range(0..8);
            let pts: Vec<Vec2> = (0..n)
                .map(|_| Vec2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
                .collect();
            let small = Configuration::new(&pts, 10.0).unwrap();
            let x = Vec2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
            let big = small.with_point(x).unwrap();
            let (v0, v1) = (union_area(&small), union_area(&big));
            let dv = exclusive_area(&small.points, None, x, 10.0);
            assert_abs_diff_eq!(dv, v1 - v0, epsilon = 1e-10);
            // Forward: choose birth (½), place x (density 1/|T|), accept.
            let fwd = log_density(n, v0, &p)
                + (0.5 / p.torus_area()).ln()
                + birth_acceptance(n, v1 - v0, &p).ln();
            // Backward: choose death (½), pick x (1/(N+1)), accept.
            let bwd = log_density(n + 1, v1, &p)
                + (0.5 / (n as f64 + 1.0)).ln()
                + death_acceptance(n + 1, v0 - v1, &p).ln();
            assert!((fwd - bwd).abs() < 1e-12, "{fwd} vs {bwd}");
        }
    }

    #[test]
    fn cached_volume_stays_exact() {
        let p = ModelParams::new(2.0, 0.2, 10.0).unwrap();
        let mut s = GibbsState::empty(10.0).unwrap();
        let mut rng = seeded(3);
        for _ in 0..20_000 {
            gibbs_step(&mut s, &p, &mut rng);
        }
        assert!(
            s.max_volume_drift < REVALIDATE_TOL,
            "{}",
            s.max_volume_drift
        );
        assert!(s.births_accepted > 100 && s.deaths_accepted > 100);
    }

    #[test]
    fn oracle_leading_terms() {
        let p = params();
        let o = small_system_oracle(&p, 40, 200, &mut seeded(4)).unwrap();
        assert_eq!(o.log_weights[0], 0.0);
        assert_abs_diff_eq!(
            o.log_weights[1],
            (2.0 * 0.05 * 100.0 * (-4.0 * PI * 0.05f64).exp()).ln(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(o.probabilities.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(o.tail_bound < TRUNCATION_TOL);
        assert!(small_system_oracle(&p, 3, 10, &mut seeded(4)).is_err());
    }
}
