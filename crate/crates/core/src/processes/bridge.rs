//! The mean-centred Brownian bridge on [0, 2π].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::AngularSample;
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Eigenvalues of the covariance matrix below this are treated as a factorisation failure.
const PSD_CLIP: f64 = -1e-10;

/// Covariance k(t) = ((π − |t|)² − π²)/(4π) + π/6, extended 2π-periodically.
pub fn bridge_cov(t: f64) -> f64 {
    let s = t.abs().rem_euclid(TWO_PI);
    ((PI - s).powi(2) - PI * PI) / (4.0 * PI) + PI / 6.0
}

/// How bridge values at given times are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BridgeMode {
    /// Gaussian vector with covariance k(t_i − t_j) via a clipped eigen factorisation.
    Eigen,
    /// Exact sequential sampling of the bridge and its interval areas in O(n).
    Markov,
    /// Karhunen-Loève series truncated after the given number of modes.
    KarhunenLoeve(usize),
}

/// Factorised covariance for repeated exact draws at fixed times.
#[derive(Debug, Clone)]
pub struct BridgeFactor {
    factor: DMatrix<f64>,
}

impl BridgeFactor {
    pub fn new(times: &[f64]) -> Result<Self> {
        let n = times.len();
        let cov = DMatrix::from_fn(n, n, |i, j| bridge_cov(times[i] - times[j]));
        let eig = SymmetricEigen::new(cov);
        let mut factor = eig.eigenvectors;
        for (j, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam < PSD_CLIP {
                return Err(Error::Numeric(format!(
                    "covariance matrix has eigenvalue {lam}"
                )));
            }
            let scale = lam.max(0.0).sqrt();
            factor.column_mut(j).scale_mut(scale);
        }
        Ok(Self { factor })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.factor.ncols();
        let xi = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        (&self.factor * xi).iter().copied().collect()
    }
}

/// Exact values at sorted times, sampling the bridge W̃ point by point together
/// with its area over each gap, then subtracting the time average.
fn sample_markov<R: Rng + ?Sized>(times: &[f64], rng: &mut R) -> Vec<f64> {
    let mut values = Vec::with_capacity(times.len());
    let (mut s, mut x) = (0.0, 0.0);
    let mut area = 0.0;
    for &t in times {
        let dt = t - s;
        let rem = TWO_PI - s;
        let mean = x * (TWO_PI - t) / rem;
        let var = dt * (TWO_PI - t) / rem;
        let xn = mean + var.max(0.0).sqrt() * rng.sample::<f64, _>(StandardNormal);
        area +=
            0.5 * dt * (x + xn) + (dt.powi(3) / 12.0).sqrt() * rng.sample::<f64, _>(StandardNormal);
        values.push(xn);
        s = t;
        x = xn;
    }
    let dt = TWO_PI - s;
    area += 0.5 * dt * x + (dt.powi(3) / 12.0).sqrt() * rng.sample::<f64, _>(StandardNormal);
    let avg = area / TWO_PI;
    values.iter().map(|v| v - avg).collect()
}

/// Bridge values B_{t_i} at sorted times in [0, 2π).
pub fn sample_bridge<R: Rng + ?Sized>(
    times: &[f64],
    rng: &mut R,
    mode: BridgeMode,
) -> Result<Vec<f64>> {
    for (i, &t) in times.iter().enumerate() {
        if !(0.0..TWO_PI).contains(&t) || (i > 0 && t < times[i - 1]) {
            return Err(Error::Domain(
                "bridge times must be sorted in [0, 2π)".into(),
            ));
        }
    }
    match mode {
        BridgeMode::Eigen => Ok(BridgeFactor::new(times)?.sample(rng)),
        BridgeMode::Markov => Ok(sample_markov(times, rng)),
        BridgeMode::KarhunenLoeve(k) => Ok(KlPath::sample(k, rng).eval_many(times)),
    }
}

/// Sequential exact sampler of the mean-centred bridge at increasing times.
///
/// With W a standard Brownian motion and I its running integral, the bridge is
/// B_t = W_t − (t/2π)W_{2π} − I_{2π}/2π + W_{2π}/2. The end values (W_{2π}, I_{2π})
/// are drawn first, and each step samples (W_t, I_t) conditionally on the
/// current state and the end values, so B_t is available immediately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequentialBridge {
    w_end: f64,
    i_end: f64,
    t: f64,
    w: f64,
    i: f64,
}

type Mat2 = [[f64; 2]; 2];

fn transition(h: f64) -> Mat2 {
    [[1.0, 0.0], [h, 1.0]]
}

fn innovation(h: f64) -> Mat2 {
    [[h, 0.5 * h * h], [0.5 * h * h, h * h * h / 3.0]]
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            c[r][k] = a[r][0] * b[0][k] + a[r][1] * b[1][k];
        }
    }
    c
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn inverse(a: &Mat2) -> Mat2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ]
}

fn apply(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

impl SequentialBridge {
    /// A fresh path positioned at t = 0.
    pub fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let w_end = TWO_PI.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let i_end = 0.5 * TWO_PI * w_end
            + (TWO_PI.powi(3) / 12.0).sqrt() * rng.sample::<f64, _>(StandardNormal);
        Self {
            w_end,
            i_end,
            t: 0.0,
            w: 0.0,
            i: 0.0,
        }
    }

    /// Current time.
    pub fn time(&self) -> f64 {
        self.t
    }

    /// B at the current time.
    pub fn value(&self) -> f64 {
        self.w - self.t / TWO_PI * self.w_end - self.i_end / TWO_PI + 0.5 * self.w_end
    }

    /// Moves to time `t` in [current, 2π) and returns B_t.
    pub fn advance<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> Result<f64> {
        if !(t >= self.t && t < TWO_PI) {
            return Err(Error::Domain(format!(
                "bridge time {t} must lie in [{}, 2π)",
                self.t
            )));
        }
        let (h1, h2) = (t - self.t, TWO_PI - t);
        let x = [self.w, self.i];
        let y = [self.w_end, self.i_end];
        let p1 = innovation(h1);
        let phi2 = transition(h2);
        let m1 = apply(&transition(h1), x);
        let gain = mul(&mul(&p1, &transpose(&phi2)), &inverse(&innovation(h1 + h2)));
        let pred = apply(&phi2, m1);
        let corr = apply(&gain, [y[0] - pred[0], y[1] - pred[1]]);
        let mean = [m1[0] + corr[0], m1[1] + corr[1]];
        let reduce = mul(&mul(&gain, &phi2), &p1);
        let (a, b, c) = (
            p1[0][0] - reduce[0][0],
            0.5 * (p1[0][1] - reduce[0][1] + p1[1][0] - reduce[1][0]),
            p1[1][1] - reduce[1][1],
        );
        let l00 = a.max(0.0).sqrt();
        let l10 = if l00 > 0.0 { b / l00 } else { 0.0 };
        let l11 = (c - l10 * l10).max(0.0).sqrt();
        let (g0, g1): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        self.w = mean[0] + l00 * g0;
        self.i = mean[1] + l10 * g0 + l11 * g1;
        self.t = t;
        Ok(self.value())
    }
}

/// A bridge path given by its Karhunen-Loève coefficients:
/// B_t = π^{−1/2} Σ_k (A_k cos kt + A*_k sin kt)/k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlPath {
    pub a: Vec<f64>,
    pub a_star: Vec<f64>,
}

impl KlPath {
    /// A path with i.i.d. standard normal coefficients up to order `k`.
    pub fn sample<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        let mut a = Vec::with_capacity(k);
        let mut a_star = Vec::with_capacity(k);
        for _ in 0..k {
            a.push(rng.sample(StandardNormal));
            a_star.push(rng.sample(StandardNormal));
        }
        Self { a, a_star }
    }

    /// The path cos t.
    pub fn cosine() -> Self {
        Self {
            a: vec![PI.sqrt()],
            a_star: vec![0.0],
        }
    }

    /// The path sin t.
    pub fn sine() -> Self {
        Self {
            a: vec![0.0],
            a_star: vec![PI.sqrt()],
        }
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// The path truncated to its first `k` modes.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.order());
        Self {
            a: self.a[..k].to_vec(),
            a_star: self.a_star[..k].to_vec(),
        }
    }

    fn series(&self, t: f64, derivative: bool) -> f64 {
        let (s1, c1) = t.sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut acc = 0.0;
        for k in 0..self.order() {
            let kk = (k + 1) as f64;
            acc += if derivative {
                -self.a[k] * s + self.a_star[k] * c
            } else {
                (self.a[k] * c + self.a_star[k] * s) / kk
            };
            let (sn, cn) = (s * c1 + c * s1, c * c1 - s * s1);
            s = sn;
            c = cn;
        }
        acc / PI.sqrt()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.series(t, false)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.series(t, true)
    }

    pub fn eval_many(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.eval(t)).collect()
    }

    /// ∫₀^{2π} B_t² dt = Σ (A_k² + A*_k²)/k².
    pub fn l2_norm_sq(&self) -> f64 {
        (0..self.order())
            .map(|k| (self.a[k].powi(2) + self.a_star[k].powi(2)) / ((k + 1) as f64).powi(2))
            .sum()
    }

    /// ∫₀^{2π} Ḃ_t² dt = Σ (A_k² + A*_k²).
    pub fn derivative_l2_sq(&self) -> f64 {
        (0..self.order())
            .map(|k| self.a[k].powi(2) + self.a_star[k].powi(2))
            .sum()
    }

    /// (∫ B_t cos t dt, ∫ B_t sin t dt) = √π (A₁, A*₁).
    pub fn first_fourier(&self) -> (f64, f64) {
        if self.order() == 0 {
            return (0.0, 0.0);
        }
        (PI.sqrt() * self.a[0], PI.sqrt() * self.a_star[0])
    }

    /// Largest |B_t| over a uniform grid refined by golden-section search; a lower bound on the supremum.
    pub fn sup_norm(&self, grid: usize) -> f64 {
        let h = TWO_PI / grid as f64;
        let f = |t: f64| self.eval(t).abs();
        let mut best = 0.0f64;
        let vals: Vec<f64> = (0..grid).map(|i| f(i as f64 * h)).collect();
        for i in 0..grid {
            let prev = vals[(i + grid - 1) % grid];
            let next = vals[(i + 1) % grid];
            best = best.max(vals[i]);
            if vals[i] >= prev && vals[i] >= next {
                let (mut lo, mut hi) = ((i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
                let g = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..60 {
                    let m1 = hi - g * (hi - lo);
                    let m2 = lo + g * (hi - lo);
                    if f(m1) > f(m2) {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                best = best.max(f(0.5 * (lo + hi)));
            }
        }
        best
    }
}

/// Exact variance of Σ B̄_i Θ_i for fixed angles, Σ_ij w_i w_j k(T_i − T_j) with w_i = ½(Θ_{i−1} + Θ_i).
pub fn discretised_mean_variance(sample: &AngularSample) -> f64 {
    let n = sample.n;
    let w: Vec<f64> = (0..n)
        .map(|i| 0.5 * (sample.theta[(i + n - 1) % n] + sample.theta[i]))
        .collect();
    let mut v = 0.0;
    for i in 0..n {
        for j in 0..n {
            v += w[i] * w[j] * bridge_cov(sample.t[i] - sample.t[j]);
        }
    }
    v
}
