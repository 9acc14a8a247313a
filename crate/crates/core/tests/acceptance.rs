//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line.

use std::f64::consts::PI;
use std::time::Instant;

use droplet_core::contours::{
    delta_and_volume_expansion, filled_halo, globally_extremal, is_outer_contour, polygon_size_for,
    random_outer_contour,
};
use droplet_core::estimators::{
    membership_diagnostics, renewal_expectation_series, run_gibbs, small_system_oracle,
    MembershipOptions,
};
use droplet_core::model_constants::{
    default_renewal_law, derived_constants, renewal_integral, solve_tau_star, QuadratureSpec,
};
use droplet_core::numerics::linear_fit;
use droplet_core::processes::{discretisation_bounds, AngularSample, BridgeFactor, KlPath};
use droplet_core::rng::seeded;
use droplet_core::torus_geometry::{
    bonnesen_check, halo, steiner_identity_check, union_area, Configuration, Halo, Vec2,
};
use droplet_core::ModelParams;
use rand::Rng;
use rand_distr::StandardNormal;

fn report(n: u32, pass: bool, detail: String, start: Instant) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {n:>2}: {verdict}  {detail}  ({:.1} s)",
        start.elapsed().as_secs_f64()
    );
    pass
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn random_config(rng: &mut impl Rng, n: usize, half: f64, l: f64) -> Configuration {
    let pts: Vec<Vec2> = (0..n)
        .map(|_| Vec2::new(rng.random_range(-half..half), rng.random_range(-half..half)))
        .collect();
    Configuration::new(&pts, l).unwrap()
}

/// Random halos with a single component and simply connected, reach-regular 2-interior.
fn simply_connected_halos(count: usize, seed: u64) -> Vec<Halo> {
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.random_range(1..=30);
        let half = rng.random_range(1.0..4.0);
        let h = halo(&random_config(&mut rng, n, half, 40.0)).unwrap();
        if h.components == 1
            && h.holes == Some(0)
            && h.eroded.reach_condition
            && h.eroded.is_simply_connected()
        {
            out.push(h);
        }
    }
    out
}

fn criterion_01_tau_zero_integral() -> bool {
    let start = Instant::now();
    let v = renewal_integral(0.0, &QuadratureSpec::default());
    let exact = 4.0 * PI / 3f64.sqrt();
    let err = (v - exact).abs();
    let pass = err < 1e-8 && start.elapsed().as_secs_f64() < 1.0;
    report(
        1,
        pass,
        format!("integral {v:.12} vs {exact:.12}, error {err:.1e}"),
        start,
    )
}

fn criterion_02_tau_star_solve() -> bool {
    let start = Instant::now();
    let spec = QuadratureSpec::default();
    let law = solve_tau_star(1e-12, &spec).unwrap();
    let residual = (renewal_integral(law.tau_star, &spec) - 1.0).abs();
    let fine = QuadratureSpec {
        panels: spec.panels * 2,
        order: spec.order + 4,
        ..spec
    };
    let refined = solve_tau_star(1e-12, &fine).unwrap();
    let drift = (refined.tau_star - law.tau_star).abs();
    let pass = residual < 1e-10 && drift < 1e-8 && start.elapsed().as_secs_f64() < 1.0;
    report(
        2,
        pass,
        format!(
            "tau* {:.12}, residual {residual:.1e}, refinement drift {drift:.1e}",
            law.tau_star
        ),
        start,
    )
}

fn criterion_03_halo_area_hit_or_miss() -> bool {
    let start = Instant::now();
    let mut rng = seeded(303);
    let samples = 1_000_000u64;
    let (mut worst, mut failures) = (0.0f64, 0);
    for _ in 0..100 {
        let n = rng.random_range(1..=30);
        let c = random_config(&mut rng, n, 5.0, 40.0);
        let exact = union_area(&c);
        let pts: Vec<Vec2> = c.points.iter().map(|p| p.vec()).collect();
        let (x0, x1) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p.x - 2.0), b.max(p.x + 2.0))
            });
        let (y0, y1) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p.y - 2.0), b.max(p.y + 2.0))
            });
        let mut hits = 0u64;
        for _ in 0..samples {
            let x = Vec2::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
            if pts.iter().any(|p| (x - *p).norm2() <= 4.0) {
                hits += 1;
            }
        }
        let box_area = (x1 - x0) * (y1 - y0);
        let p = hits as f64 / samples as f64;
        let sigma = (p * (1.0 - p) / samples as f64).sqrt() * box_area;
        let z = (p * box_area - exact).abs() / sigma.max(1e-300);
        worst = worst.max(z);
        if z > 4.0 {
            failures += 1;
        }
    }
    let pass = failures == 0 && start.elapsed().as_secs_f64() < 120.0;
    report(
        3,
        pass,
        format!("100 configurations, largest |z| {worst:.2}, failures {failures}"),
        start,
    )
}

fn criterion_04_steiner_identity() -> bool {
    let start = Instant::now();
    let halos = simply_connected_halos(100, 404);
    let worst = halos
        .iter()
        .map(|h| steiner_identity_check(h).residual.abs())
        .fold(0.0, f64::max);
    let multi = halos.iter().filter(|h| h.config.len() > 1).count();
    report(
        4,
        worst < 1e-9,
        format!("100 halos ({multi} with several points), largest residual {worst:.1e}"),
        start,
    )
}

fn criterion_05_locality_equals_globality() -> bool {
    let start = Instant::now();
    let mut rng = seeded(505);
    let (mut accepted, mut agree, mut positives) = (0, 0, 0);
    while accepted < 10_000 {
        let big_r = if rng.random_bool(0.5) { 4.0 } else { 6.0 };
        let eps = rng.random_range(0.05..0.3);
        let base = polygon_size_for(eps, big_r) as f64;
        let n = (base * rng.random_range(0.6..1.3)).round().max(3.0) as usize;
        let step = 2.0 * PI / n as f64;
        let z: Vec<Vec2> = (0..n)
            .map(|k| {
                let t = step * (k as f64 + rng.random_range(-0.3..0.3));
                Vec2::polar(big_r - 2.0 + rng.random_range(-eps..eps), t)
            })
            .collect();
        let Ok(local) = is_outer_contour(&z, big_r, eps) else {
            continue;
        };
        accepted += 1;
        let global = globally_extremal(&z, big_r, eps).iter().all(|&b| b);
        if local == global {
            agree += 1;
        }
        if local {
            positives += 1;
        }
    }
    report(
        5,
        agree == accepted,
        format!("{agree} of {accepted} verdicts agree, {positives} extremal"),
        start,
    )
}

fn criterion_06_expansion_scaling() -> bool {
    let start = Instant::now();
    let k = derived_constants(&ModelParams::new(2.0, 1.0, 40.0).unwrap());
    let eps_grid = [0.1, 0.05, 0.025, 0.0125];
    let mut worst = Vec::new();
    for (i, &eps) in eps_grid.iter().enumerate() {
        let mut rng = seeded(600 + i as u64);
        let n = polygon_size_for(eps, 4.0);
        let mut w: f64 = 0.0;
        for _ in 0..200 {
            let c = random_outer_contour(n, 4.0, eps, &mut rng, 10_000).unwrap();
            let rep = delta_and_volume_expansion(&c, &k).unwrap();
            let scale = rep.y[0] + rep.y[1] + rep.y[2];
            w = w.max(rep.delta_residual.abs().max(rep.volume_residual.abs()) / scale);
        }
        worst.push(w);
    }
    let fit = linear_fit(
        &eps_grid.iter().map(|e| e.ln()).collect::<Vec<_>>(),
        &worst.iter().map(|w| w.ln()).collect::<Vec<_>>(),
    )
    .unwrap();
    let pass = (fit.slope - 1.0).abs() <= 0.3 && start.elapsed().as_secs_f64() < 300.0;
    report(
        6,
        pass,
        format!("slope {:.3}, max residuals {worst:.3?}", fit.slope),
        start,
    )
}

fn criterion_07_bridge_covariance() -> bool {
    let start = Instant::now();
    let times = [0.0, 0.4, 1.1, 1.9, 2.6, 3.3, 4.2, 5.0, 5.7, 6.2];
    let factor = BridgeFactor::new(&times).unwrap();
    let mut rng = seeded(707);
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
    let mut worst: f64 = 0.0;
    for (i, j) in pairs {
        let prod: Vec<f64> = draws.iter().map(|b| b[i] * b[j]).collect();
        let (m, se) = mean_se(&prod);
        worst =
            worst.max((m - droplet_core::processes::bridge_cov(times[i] - times[j])).abs() / se);
    }
    let mut worst_inc: f64 = 0.0;
    for h in [0.1, 1.0, PI] {
        let pair = [0.5, 0.5 + h];
        let f = BridgeFactor::new(&pair).unwrap();
        let sq: Vec<f64> = (0..100_000)
            .map(|_| {
                let b = f.sample(&mut rng);
                (b[1] - b[0]).powi(2)
            })
            .collect();
        let (m, se) = mean_se(&sq);
        worst_inc = worst_inc.max((m - (h - h * h / (2.0 * PI))).abs() / se);
    }
    let pass = worst < 4.0 && worst_inc < 4.0;
    report(
        7,
        pass,
        format!("largest covariance |z| {worst:.2}, largest increment-variance |z| {worst_inc:.2}"),
        start,
    )
}

fn criterion_08_gaussian_moments() -> bool {
    let start = Instant::now();
    let (n, s) = (8, 0.5);
    let sample = AngularSample::regular(n);
    let factor = BridgeFactor::new(&sample.t).unwrap();
    let mut rng = seeded(808);
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
    let z = (m - exact).abs() / se;

    let k = 512;
    let kl: Vec<f64> = (0..100_000)
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
    let (kl_mean, _) = mean_se(&kl);
    let product: f64 = (1..=k).map(|j| 1.0 / (1.0 - s / (j * j) as f64)).product();
    let rel = (kl_mean / product - 1.0).abs();
    report(
        8,
        z < 4.0 && rel < 0.05,
        format!("increment moment {m:.4} vs {exact:.4} (|z| {z:.2}), product {kl_mean:.4} vs {product:.4} ({:.2}%)", 100.0 * rel),
        start,
    )
}

fn criterion_09_discretisation_bounds() -> bool {
    let start = Instant::now();
    let mut rng = seeded(909);
    let mut violations = 0;
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
        if !rep.holds() {
            violations += 1;
        }
        for (e, b) in rep.errors.iter().zip(rep.bounds) {
            worst = worst.max(e / b);
        }
    }
    report(
        9,
        violations == 0,
        format!("100 pairs, {violations} violations, largest error/bound {worst:.3}"),
        start,
    )
}

fn criterion_10_renewal_asymptotics() -> bool {
    let start = Instant::now();
    let law = default_renewal_law();
    let r = renewal_expectation_series(2.0, &[1e3, 1e4, 1e5, 1e6], &law).unwrap();
    let predicted = -2.0 * PI * 4f64.powf(2.0 / 3.0) * (1.0 - law.tau_star);
    let rel = ((r.extrapolated - predicted) / predicted).abs();
    let pass = rel < 0.02 && start.elapsed().as_secs_f64() < 600.0;
    report(
        10,
        pass,
        format!(
            "extrapolated {:.8} vs {predicted:.8}, relative error {rel:.1e}",
            r.extrapolated
        ),
        start,
    )
}

fn criterion_11_gibbs_against_oracle() -> bool {
    let start = Instant::now();
    let p = ModelParams::new(2.0, 0.05, 10.0).unwrap();
    let oracle = small_system_oracle(&p, 40, 20_000, &mut seeded(1100)).unwrap();
    let run = run_gibbs(&p, 10_000_000, 100_000, 3, 100, &mut seeded(1101)).unwrap();
    let z: Vec<f64> = (0..3)
        .map(|n| {
            let sigma = run.stderr[n].hypot(oracle.stderr[n]);
            (run.probabilities[n] - oracle.probabilities[n]) / sigma
        })
        .collect();
    let pass = z.iter().all(|v| v.abs() < 3.0) && start.elapsed().as_secs_f64() < 600.0;
    report(
        11,
        pass,
        format!(
            "chain {:.5?} oracle {:.5?} z {z:.2?}",
            run.probabilities,
            &oracle.probabilities[..3]
        ),
        start,
    )
}

fn criterion_12_isoperimetric_and_bonnesen() -> bool {
    let start = Instant::now();
    let kappa = 2.0;
    let mut halos = simply_connected_halos(600, 1200);
    let mut rng = seeded(1201);
    while halos.len() < 1000 {
        let big_r = rng.random_range(3.0..6.0);
        let eps = rng.random_range(0.02..0.3);
        let n = polygon_size_for(eps, big_r);
        let c = random_outer_contour(n, big_r, eps, &mut rng, 10_000).unwrap();
        halos.push(filled_halo(&c).unwrap());
    }
    let (mut iso, mut bonn, mut tightest) = (0, 0, f64::INFINITY);
    for h in &halos {
        let radius = (h.area / PI).sqrt().max(2.0);
        let rep = bonnesen_check(h, kappa, radius, 1e-9).unwrap();
        if !rep.isoperimetric_holds {
            iso += 1;
        }
        if !rep.bonnesen_holds {
            bonn += 1;
        }
        if rep.bound > 0.0 {
            tightest = tightest.min(rep.bound - rep.hausdorff);
        }
    }
    report(
        12,
        iso == 0 && bonn == 0,
        format!(
            "{} halos, isoperimetric violations {iso}, Bonnesen violations {bonn}, smallest slack {tightest:.2e}",
            halos.len()
        ),
        start,
    )
}

fn criterion_13_membership_diagnostics() -> bool {
    let start = Instant::now();
    let law = default_renewal_law();
    let d = membership_diagnostics(
        2.0,
        &[1e2, 1e3, 1e4],
        &law,
        100_000,
        &MembershipOptions::default(),
        1300,
    )
    .unwrap();
    let ess_ok = d
        .rows
        .iter()
        .all(|r| r.at_zero.ess >= 100.0 && r.at_offset.ess >= 100.0 && r.at_zero.estimate > 0.0);
    let decay_ok = d
        .rows
        .iter()
        .all(|r| r.decay_ratio.is_finite() && r.decay_ratio > 0.0)
        && d.decay_slope.is_finite()
        && d.decay_slope > 0.0;
    let ratios: Vec<f64> = d.rows.iter().map(|r| r.offset_log_ratio).collect();
    let offset_ok = ratios.iter().all(|v| v.is_finite()) && ratios.windows(2).all(|w| w[1] < w[0]);
    let decay: Vec<f64> = d.rows.iter().map(|r| r.decay_ratio).collect();
    let ess: Vec<f64> = d.rows.iter().map(|r| r.at_zero.ess).collect();
    report(
        13,
        ess_ok && decay_ok && offset_ok,
        format!(
            "ESS {ess:.0?}, decay ratios {decay:.3?}, slope {:.3} (tau** {:.3}), offset log-ratios {ratios:.4?}",
            d.decay_slope, d.tau_double_star
        ),
        start,
    )
}

fn main() {
    let criteria: [fn() -> bool; 13] = [
        criterion_01_tau_zero_integral,
        criterion_02_tau_star_solve,
        criterion_03_halo_area_hit_or_miss,
        criterion_04_steiner_identity,
        criterion_05_locality_equals_globality,
        criterion_06_expansion_scaling,
        criterion_07_bridge_covariance,
        criterion_08_gaussian_moments,
        criterion_09_discretisation_bounds,
        criterion_10_renewal_asymptotics,
        criterion_11_gibbs_against_oracle,
        criterion_12_isoperimetric_and_bonnesen,
        criterion_13_membership_diagnostics,
    ];
    let mut failed = 0;
    for (k, criterion) in criteria.iter().enumerate() {
        let ok = std::panic::catch_unwind(criterion).unwrap_or_else(|_| {
            println!("criterion {:>2}: FAIL  panicked", k + 1);
            false
        });
        if !ok {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
