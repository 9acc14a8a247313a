use std::f64::consts::PI;

use droplet_core::processes::{
    bridge_cov, discretisation_bounds, discretised_mean_variance, sample_bridge, AngularSample,
    BridgeFactor, BridgeMode, KlPath,
};
use droplet_core::rng::seeded;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

/// Mean and standard error of a sample.
fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Asymptotic Kolmogorov-Smirnov p-value for the standard normal.
fn ks_normal_pvalue(mut x: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let norm = Normal::standard();
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = norm.cdf(v);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    let lam = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lam * lam).exp()
        })
        .sum();
    p.clamp(0.0, 1.0)
}

#[test]
fn exact_covariance_at_ten_pairs() {
    let times = [0.0, 0.4, 1.1, 1.9, 2.6, 3.3, 4.2, 5.0, 5.7, 6.2];
    let factor = BridgeFactor::new(&times).unwrap();
    let mut rng = seeded(31);
    let draws: Vec<Vec<f64>> = (0..100_000).map(|_| factor.sample(&mut rng)).collect();
    let pairs = [
        (0, 0),
        (0, 3),
        (1, 5),
        (2, 9),
        (3, 4),
        (4, 8),
        (5, 5),
        (6, 7),
        (1, 8),
        (0, 9),
    ];
    for (i, j) in pairs {
        let prod: Vec<f64> = draws.iter().map(|b| b[i] * b[j]).collect();
        let (m, se) = mean_se(&prod);
        let k = bridge_cov(times[i] - times[j]);
        assert!((m - k).abs() < 4.0 * se, "({i},{j}): {m} vs {k} ± {se}");
    }
}

#[test]
fn increment_variances_and_covariances() {
    let mut rng = seeded(32);
    for (mode, draws) in [(BridgeMode::Eigen, 100_000), (BridgeMode::Markov, 100_000)] {
        for h in [0.1, 1.0, PI] {
            let times = [0.5, 0.5 + h];
            let factor = BridgeFactor::new(&times).unwrap();
            let inc: Vec<f64> = (0..draws)
                .map(|_| {
                    let b = match mode {
                        BridgeMode::Eigen => factor.sample(&mut rng),
                        _ => sample_bridge(&times, &mut rng, mode).unwrap(),
                    };
                    (b[1] - b[0]).powi(2)
                })
                .collect();
            let (m, se) = mean_se(&inc);
            let exact = h - h * h / (2.0 * PI);
            assert!(
                (m - exact).abs() < 4.0 * se,
                "{mode:?} h={h}: {m} vs {exact}"
            );
        }
        let times = [1.0, 1.5, 3.0, 3.5];
        let prod: Vec<f64> = (0..draws)
            .map(|_| {
                let b = sample_bridge(&times, &mut rng, mode).unwrap();
                (b[1] - b[0]) * (b[3] - b[2])
            })
            .collect();
        let (m, se) = mean_se(&prod);
        let exact = -1.0 / (8.0 * PI);
        assert!((m - exact).abs() < 4.0 * se, "{mode:?}: {m} vs {exact}");
    }
}

#[test]
fn first_fourier_coefficient_is_standard_normal() {
    let grid = 2048;
    let h = 2.0 * PI / grid as f64;
    let times: Vec<f64> = (0..grid).map(|i| i as f64 * h).collect();
    let mut rng = seeded(33);
    let (mut a1, mut avg_err) = (Vec::new(), Vec::new());
    for _ in 0..10_000 {
        let b = sample_bridge(&times, &mut rng, BridgeMode::Markov).unwrap();
        let c: f64 = b.iter().zip(&times).map(|(v, t)| v * t.cos()).sum::<f64>() * h;
        a1.push(c / PI.sqrt());
        avg_err.push(b.iter().sum::<f64>() * h);
    }
    let p = ks_normal_pvalue(a1);
    assert!(p > 0.001, "KS p-value {p}");
    // The grid average of an exact path deviates from its zero time average
    // by a Gaussian error of variance (Σ θ³)/12 = 2πh²/12.
    let rms = (avg_err.iter().map(|e| e * e).sum::<f64>() / avg_err.len() as f64).sqrt();
    let expected = h * (2.0 * PI / 12.0).sqrt();
    assert!((rms / expected - 1.0).abs() < 0.05, "{rms} vs {expected}");
}

#[test]
fn karhunen_loeve_moment_product() {
    let mut rng = seeded(34);
    let s = 0.5;
    let k = 512;
    let vals: Vec<f64> = (0..100_000)
        .map(|_| {
            let l2: f64 = (1..=k)
                .map(|j| {
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    (a * a + b * b) / (j * j) as f64
                })
                .sum();
            (0.5 * s * l2).exp()
        })
        .collect();
    let (m, _) = mean_se(&vals);
    let truncated: f64 = (1..=k).map(|j| 1.0 / (1.0 - s / (j * j) as f64)).product();
    let x = s.sqrt();
    let infinite = PI * x / (PI * x).sin();
    assert!((truncated / infinite - 1.0).abs() < 1e-3);
    assert!((m / truncated - 1.0).abs() < 0.05, "{m} vs {truncated}");
}

#[test]
fn scaled_increment_moment() {
    let n = 8;
    let sample = AngularSample::regular(n);
    let factor = BridgeFactor::new(&sample.t).unwrap();
    let mut rng = seeded(35);
    let s = 0.5;
    let vals: Vec<f64> = (0..100_000)
        .map(|_| {
            let b = factor.sample(&mut rng);
            let y2: f64 = (0..n)
                .map(|i| (b[(i + 1) % n] - b[i]).powi(2) / sample.theta[i])
                .sum();
            (0.5 * s * y2).exp()
        })
        .collect();
    let (m, se) = mean_se(&vals);
    let exact = (1.0 - s).powf(-((n - 1) as f64) / 2.0);
    assert!((exact - 11.3137).abs() < 1e-4);
    assert!((m - exact).abs() < 4.0 * se, "{m} vs {exact} ± {se}");
}

#[test]
fn discretised_mean_moment_matches_exact_gaussian_formula() {
    let mut rng = seeded(36);
    let beta: f64 = 1.0;
    for n in [5, 12] {
        let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        t.sort_by(f64::total_cmp);
        let sample = AngularSample::from_times(t).unwrap();
        let var = discretised_mean_variance(&sample);
        let eps_n = sample.cubic_sum();
        assert!((var - eps_n / 12.0).abs() < 1e-10 * eps_n);
        let factor = BridgeFactor::new(&sample.t).unwrap();
        let sums: Vec<f64> = (0..100_000)
            .map(|_| {
                let b = factor.sample(&mut rng);
                (0..n)
                    .map(|i| 0.5 * (b[i] + b[(i + 1) % n]) * sample.theta[i])
                    .sum()
            })
            .collect();
        for s in [-1.0, -0.5, 0.5, 1.0] {
            let vals: Vec<f64> = sums.iter().map(|x| (s * beta.sqrt() * x).exp()).collect();
            let (m, se) = mean_se(&vals);
            let exact = (0.5 * s * s * beta * eps_n / 12.0).exp();
            assert!((m - exact).abs() < 4.0 * se, "n={n} s={s}: {m} vs {exact}");
            let weaker = (s * s * beta * eps_n / (32.0 * PI)).exp();
            assert!(exact > weaker);
        }
    }
}

#[test]
fn discretisation_inequalities_hold_on_random_partitions() {
    let mut rng = seeded(37);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let n = rng.random_range(2..200);
        let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        t.sort_by(f64::total_cmp);
        let part = AngularSample::from_times(t).unwrap();
        let path = match k % 4 {
            0 => KlPath::cosine(),
            1 => KlPath::sine(),
            _ => KlPath::sample(512, &mut rng).truncated(32),
        };
        let rep = discretisation_bounds(&path, &part);
        assert!(rep.holds(), "partition {k}: {rep:?}");
        for (e, b) in rep.errors.iter().zip(rep.bounds) {
            worst = worst.max(e / b);
        }
    }
    println!("largest error/bound ratio {worst}");
}
