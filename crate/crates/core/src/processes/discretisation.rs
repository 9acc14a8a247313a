//! Deterministic errors of Riemann-type sums of a smooth periodic path along a partition.

use serde::{Deserialize, Serialize};

use super::{AngularSample, KlPath};

/// Grid used for the lower bound on the supremum norm.
const SUP_GRID: usize = 4096;

/// The four discretisation errors and their bounds, with ε_n = Σ θ_i³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretisationReport {
    pub eps_n: f64,
    /// |Λ₁ − ‖τ‖₂²|, |Λ₂|, |Λ₃ − ∫τ cos|, |Λ₄ − ∫τ sin|.
    pub errors: [f64; 4],
    /// √ε_n‖τ‖_∞‖τ̇‖₂, √(ε_n/3)‖τ̇‖₂, 2√(ε_n/3)‖τ̇‖₂, 2√(ε_n/3)‖τ̇‖₂.
    pub bounds: [f64; 4],
}

impl DiscretisationReport {
    /// Whether every error is within its bound up to a relative rounding slack.
    pub fn holds(&self) -> bool {
        self.errors
            .iter()
            .zip(&self.bounds)
            .all(|(e, b)| *e <= b * (1.0 + 1e-12) + 1e-14)
    }
}

/// Errors of Σ τ̄_i²θ_i, Σ τ(t_i)θ_i and the first Fourier sums for a trigonometric path.
///
/// The supremum norm enters the bounds through a grid maximum, which can only
/// understate it, so a report that holds is conclusive.
pub fn discretisation_bounds(path: &KlPath, partition: &AngularSample) -> DiscretisationReport {
    let n = partition.n;
    let tau = path.eval_many(&partition.t);
    let (mut l1, mut l2, mut l3, mut l4) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let th = partition.theta[i];
        let bar = 0.5 * (tau[i] + tau[(i + 1) % n]);
        let (s, c) = partition.t[i].sin_cos();
        l1 += bar * bar * th;
        l2 += tau[i] * th;
        l3 += tau[i] * th * c;
        l4 += tau[i] * th * s;
    }
    let (fc, fs) = path.first_fourier();
    let eps_n = partition.cubic_sum();
    let dot = path.derivative_l2_sq().sqrt();
    let sup = path.sup_norm(SUP_GRID);
    let b = (eps_n / 3.0).sqrt() * dot;
    DiscretisationReport {
        eps_n,
        errors: [
            (l1 - path.l2_norm_sq()).abs(),
            l2.abs(),
            (l3 - fc).abs(),
            (l4 - fs).abs(),
        ],
        bounds: [eps_n.sqrt() * sup * dot, b, 2.0 * b, 2.0 * b],
    }
}
