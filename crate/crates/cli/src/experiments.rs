//! The experiments: each turns resolved settings into CSV tables and a summary.

use std::f64::consts::PI;

use droplet_core::contours::{
    delta_and_volume_expansion, globally_extremal, is_outer_contour, polygon_size_for,
    random_outer_contour,
};
use droplet_core::estimators::{
    contour_membership_prob_with, membership_diagnostics, renewal_expectation_series, run_gibbs,
    small_system_oracle, MembershipOptions,
};
use droplet_core::io::write_csv;
use droplet_core::model_constants::{
    critical_radius, default_renewal_law, derived_constants, renewal_integral,
};
use droplet_core::numerics::linear_fit;
use droplet_core::rng::{replica, seeded};
use droplet_core::torus_geometry::Vec2;
use droplet_core::{ModelParams, Result};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, Resolved};

/// A named CSV table.
pub struct Table {
    pub name: String,
    pub csv: String,
}

/// Tables and a JSON summary produced by one experiment.
pub struct Output {
    pub tables: Vec<Table>,
    pub summary: Value,
}

fn table<T: Serialize>(name: &str, rows: &[T]) -> Result<Table> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(Table {
        name: name.to_string(),
        csv: String::from_utf8(buf).expect("csv output is UTF-8"),
    })
}

/// Runs the experiment described by `r`.
pub fn run(r: &Resolved) -> Result<Output> {
    let params = ModelParams::new(r.params.kappa, r.params.beta, r.params.l)?;
    match r.experiment {
        Experiment::Constants => constants(&params),
        Experiment::ExpansionSweep => expansion_sweep(r, &params),
        Experiment::LocalityAgreement => locality_agreement(r, &params),
        Experiment::RenewalAsymptotics => renewal_asymptotics(r, &params),
        Experiment::Membership => membership(r, &params),
        Experiment::GibbsValidate => gibbs_validate(r, &params),
    }
}

#[derive(Serialize)]
struct ConstantsRow {
    kappa: f64,
    beta: f64,
    #[serde(rename = "L")]
    l: f64,
    r_c: f64,
    phi: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    g_kappa: f64,
    lambda_beta: f64,
    tau_star: f64,
    mu_star: f64,
    sigma2: f64,
}

fn constants(p: &ModelParams) -> Result<Output> {
    let d = derived_constants(p);
    let law = default_renewal_law();
    let row = ConstantsRow {
        kappa: p.kappa,
        beta: p.beta,
        l: p.l,
        r_c: d.r_c,
        phi: d.phi,
        c1: d.c1,
        c2: d.c2,
        c3: d.c3,
        g_kappa: d.g_kappa,
        lambda_beta: d.lambda_beta,
        tau_star: law.tau_star,
        mu_star: law.mu_star,
        sigma2: law.sigma2,
    };
    Ok(Output {
        tables: vec![table("constants", &[row])?],
        summary: json!({ "tau_residual": renewal_integral(law.tau_star, &law.spec) - 1.0 }),
    })
}

#[derive(Serialize)]
struct ExpansionRow {
    eps: f64,
    contour: usize,
    points: usize,
    hausdorff: f64,
    y1: f64,
    y2: f64,
    y3: f64,
    y4: f64,
    delta_exact: f64,
    delta_expanded: f64,
    volume_exact: f64,
    volume_expanded: f64,
    delta_residual: f64,
    volume_residual: f64,
    centre_residual: f64,
    relative_residual: f64,
}

#[derive(Serialize)]
struct ExpansionSummaryRow {
    eps: f64,
    contours: usize,
    max_relative_residual: f64,
    mean_relative_residual: f64,
    max_delta_residual: f64,
    max_volume_residual: f64,
    max_centre_residual: f64,
}

fn expansion_sweep(r: &Resolved, p: &ModelParams) -> Result<Output> {
    let d = derived_constants(p);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (i, &eps) in r.eps_grid.iter().enumerate() {
        let mut rng = replica(r.seed, i as u64);
        let n = polygon_size_for(eps, d.r_c);
        let mut rel = Vec::with_capacity(r.n);
        let (mut md, mut mv, mut mc): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for k in 0..r.n {
            let c = random_outer_contour(n, d.r_c, eps, &mut rng, 10_000)?;
            let e = delta_and_volume_expansion(&c, &d)?;
            let scale = e.y[0] + e.y[1] + e.y[2];
            let relative = e.delta_residual.abs().max(e.volume_residual.abs()) / scale;
            md = md.max(e.delta_residual.abs());
            mv = mv.max(e.volume_residual.abs());
            mc = mc.max(e.centre_residual);
            rel.push(relative);
            rows.push(ExpansionRow {
                eps,
                contour: k,
                points: c.n,
                hausdorff: e.eps,
                y1: e.y[0],
                y2: e.y[1],
                y3: e.y[2],
                y4: e.y[3],
                delta_exact: e.delta_exact,
                delta_expanded: e.delta_expanded,
                volume_exact: e.volume_exact,
                volume_expanded: e.volume_expanded,
                delta_residual: e.delta_residual,
                volume_residual: e.volume_residual,
                centre_residual: e.centre_residual,
                relative_residual: relative,
            });
        }
        summary.push(ExpansionSummaryRow {
            eps,
            contours: r.n,
            max_relative_residual: rel.iter().cloned().fold(0.0, f64::max),
            mean_relative_residual: rel.iter().sum::<f64>() / rel.len() as f64,
            max_delta_residual: md,
            max_volume_residual: mv,
            max_centre_residual: mc,
        });
    }
    let slope = if summary.len() >= 2 {
        let x: Vec<f64> = summary.iter().map(|s| s.eps.ln()).collect();
        let y: Vec<f64> = summary
            .iter()
            .map(|s| s.max_relative_residual.ln())
            .collect();
        Some(linear_fit(&x, &y)?.slope)
    } else {
        None
    };
    Ok(Output {
        tables: vec![
            table("expansion-sweep", &summary)?,
            table("expansion-contours", &rows)?,
        ],
        summary: json!({ "log_log_slope": slope }),
    })
}

#[derive(Serialize)]
struct LocalityRow {
    eps: f64,
    configurations: usize,
    local_extremal: usize,
    global_extremal: usize,
    agreements: usize,
    disagreements: usize,
}

fn locality_agreement(r: &Resolved, p: &ModelParams) -> Result<Output> {
    let big_r = critical_radius(p.kappa)?;
    let per = r.replicas / r.eps_grid.len();
    let mut rows = Vec::new();
    for (i, &eps) in r.eps_grid.iter().enumerate() {
        let mut rng = replica(r.seed, i as u64);
        let mut row = LocalityRow {
            eps,
            configurations: 0,
            local_extremal: 0,
            global_extremal: 0,
            agreements: 0,
            disagreements: 0,
        };
        while row.configurations < per {
            let z = jittered(&mut rng, big_r, eps);
            let Ok(local) = is_outer_contour(&z, big_r, eps) else {
                continue;
            };
            let global = globally_extremal(&z, big_r, eps).iter().all(|&b| b);
            row.configurations += 1;
            row.local_extremal += local as usize;
            row.global_extremal += global as usize;
            if local == global {
                row.agreements += 1;
            } else {
                row.disagreements += 1;
            }
        }
        rows.push(row);
    }
    let total: usize = rows.iter().map(|r| r.configurations).sum();
    let agree: usize = rows.iter().map(|r| r.agreements).sum();
    Ok(Output {
        tables: vec![table("locality-agreement", &rows)?],
        summary: json!({ "configurations": total, "agreement_fraction": agree as f64 / total as f64 }),
    })
}

/// Angle-jittered polygon in the annulus about the ring of radius R − 2.
fn jittered<R: Rng + ?Sized>(rng: &mut R, big_r: f64, eps: f64) -> Vec<Vec2> {
    let base = polygon_size_for(eps, big_r) as f64;
    let n = (base * rng.random_range(0.6..1.3)).round().max(3.0) as usize;
    let step = 2.0 * PI / n as f64;
    (0..n)
        .map(|k| {
            let t = step * (k as f64 + rng.random_range(-0.3..0.3));
            Vec2::polar(big_r - 2.0 + rng.random_range(-eps..eps), t)
        })
        .collect()
}

#[derive(Serialize)]
struct RenewalRow {
    beta: f64,
    beta_inv_cbrt: f64,
    normalised_log_expectation: f64,
    log_expectation: f64,
    log_empty_term: f64,
}

fn renewal_asymptotics(r: &Resolved, p: &ModelParams) -> Result<Output> {
    let law = default_renewal_law();
    let s = renewal_expectation_series(p.kappa, &r.beta_grid, &law)?;
    let rows: Vec<RenewalRow> = (0..s.betas.len())
        .map(|i| RenewalRow {
            beta: s.betas[i],
            beta_inv_cbrt: 1.0 / s.betas[i].cbrt(),
            normalised_log_expectation: s.values[i],
            log_expectation: s.log_expectations[i],
            log_empty_term: s.log_empty_terms[i],
        })
        .collect();
    Ok(Output {
        tables: vec![table("renewal-asymptotics", &rows)?],
        summary: json!({
            "extrapolated": s.extrapolated,
            "refined_extrapolated": s.refined_extrapolated,
            "predicted": s.predicted,
            "relative_error": ((s.extrapolated - s.predicted) / s.predicted).abs(),
            "grid_step": s.grid_step,
        }),
    })
}

#[derive(Serialize)]
struct MembershipRowOut {
    beta: f64,
    m: f64,
    replicas: usize,
    estimate: f64,
    log_estimate: f64,
    stderr: f64,
    ess: f64,
    survivors: usize,
    upper_bound: Option<f64>,
    decay_ratio: f64,
    offset_log_ratio: Option<f64>,
    chi_log_moment: f64,
}

fn membership(r: &Resolved, p: &ModelParams) -> Result<Output> {
    let law = default_renewal_law();
    let options = MembershipOptions {
        chi_delta: r.chi_delta,
        ..MembershipOptions::default()
    };
    let d = membership_diagnostics(p.kappa, &r.beta_grid, &law, r.replicas, &options, r.seed)?;
    let mut rows = Vec::new();
    for (k, row) in d.rows.iter().enumerate() {
        let s = row.beta.cbrt();
        let z = &row.at_zero;
        let mut push = |e: &droplet_core::estimators::MembershipEstimate, offset: Option<f64>| {
            rows.push(MembershipRowOut {
                beta: row.beta,
                m: e.m,
                replicas: e.replicas,
                estimate: e.estimate,
                log_estimate: e.log_estimate,
                stderr: e.stderr,
                ess: e.ess,
                survivors: e.survivors,
                upper_bound: e.upper_bound,
                decay_ratio: -e.log_estimate / s,
                offset_log_ratio: offset,
                chi_log_moment: e.chi_log_moment,
            })
        };
        push(z, None);
        push(&row.at_offset, Some(row.offset_log_ratio));
        for &m in &r.m_grid {
            let params = ModelParams::new(p.kappa, row.beta, p.l)?;
            let e = contour_membership_prob_with(
                m,
                &params,
                &law,
                r.replicas,
                &options,
                &mut replica(r.seed, k as u64),
            )?;
            let ratio = (e.log_estimate - z.log_estimate).abs() / s;
            push(&e, Some(ratio));
        }
    }
    Ok(Output {
        tables: vec![table("membership", &rows)?],
        summary: json!({
            "decay_slope": d.decay_slope,
            "tau_double_star": d.tau_double_star,
            "entropy_constant": d.entropy_constant,
        }),
    })
}

#[derive(Serialize)]
struct GibbsRow {
    n: usize,
    chain_probability: f64,
    chain_stderr: f64,
    oracle_probability: f64,
    oracle_stderr: f64,
    z_score: f64,
}

fn gibbs_validate(r: &Resolved, p: &ModelParams) -> Result<Output> {
    let oracle = small_system_oracle(p, r.n, r.replicas, &mut replica(r.seed, 0))?;
    let run = run_gibbs(p, r.steps, r.burn_in, 3, 100, &mut seeded(r.seed))?;
    let rows: Vec<GibbsRow> = (0..3)
        .map(|n| {
            let sigma = run.stderr[n].hypot(oracle.stderr[n]);
            GibbsRow {
                n,
                chain_probability: run.probabilities[n],
                chain_stderr: run.stderr[n],
                oracle_probability: oracle.probabilities[n],
                oracle_stderr: oracle.stderr[n],
                z_score: (run.probabilities[n] - oracle.probabilities[n]) / sigma,
            }
        })
        .collect();
    let within = rows.iter().all(|r| r.z_score.abs() < 3.0);
    Ok(Output {
        tables: vec![table("gibbs-validate", &rows)?],
        summary: json!({
            "within_three_sigma": within,
            "mean_n": run.mean_n,
            "birth_acceptance_rate": run.birth_acceptance_rate,
            "death_acceptance_rate": run.death_acceptance_rate,
            "max_volume_drift": run.max_volume_drift,
            "oracle_tail_bound": oracle.tail_bound,
            "log_partition_per_area": oracle.log_partition / (p.beta * p.torus_area()),
        }),
    })
}
