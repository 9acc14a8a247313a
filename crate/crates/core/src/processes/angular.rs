//! The Poisson point process of angles on [0, 2π).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Sorted angles T₁ < … < T_N in [0, 2π) and their cyclic increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSample {
    pub n: usize,
    pub t: Vec<f64>,
    /// Θ_i = T_{i+1} − T_i, with Θ_N = T₁ + 2π − T_N.
    pub theta: Vec<f64>,
}

impl AngularSample {
    /// Sample from sorted angles in [0, 2π).
    pub fn from_times(t: Vec<f64>) -> Result<Self> {
        for (i, &ti) in t.iter().enumerate() {
            if !(0.0..TWO_PI).contains(&ti) {
                return Err(Error::Domain(format!("angle {ti} outside [0, 2π)")));
            }
            if i > 0 && ti < t[i - 1] {
                return Err(Error::Domain("angles must be sorted".into()));
            }
        }
        let n = t.len();
        let theta = (0..n)
            .map(|i| {
                if i + 1 < n {
                    t[i + 1] - t[i]
                } else {
                    t[0] + TWO_PI - t[i]
                }
            })
            .collect();
        Ok(Self { n, t, theta })
    }

    /// n equally spaced angles starting at 0.
    pub fn regular(n: usize) -> Self {
        let t = (0..n).map(|i| TWO_PI * i as f64 / n as f64).collect();
        Self::from_times(t).expect("regular angles are valid")
    }

    /// Σ Θ_i³.
    pub fn cubic_sum(&self) -> f64 {
        self.theta.iter().map(|th| th.powi(3)).sum()
    }
}

/// A Poisson process of intensity λ on [0, 2π): N ~ Poisson(2πλ), angles i.i.d. uniform and sorted.
pub fn sample_angular<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<AngularSample> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "intensity must be non-negative, got {lambda}"
        )));
    }
    let n = if lambda == 0.0 {
        0
    } else {
        let pois = Poisson::new(TWO_PI * lambda).map_err(|e| Error::Domain(e.to_string()))?;
        pois.sample(rng) as usize
    };
    let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TWO_PI)).collect();
    t.sort_by(f64::total_cmp);
    AngularSample::from_times(t)
}
