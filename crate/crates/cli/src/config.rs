//! Experiment configuration: JSON schema, command-line overrides and validation.

use std::path::{Path, PathBuf};

use droplet_core::model_constants::critical_radius;
use serde::{Deserialize, Serialize};

/// The experiments the runner knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Constants,
    ExpansionSweep,
    LocalityAgreement,
    RenewalAsymptotics,
    Membership,
    GibbsValidate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Constants => "constants",
            Experiment::ExpansionSweep => "expansion-sweep",
            Experiment::LocalityAgreement => "locality-agreement",
            Experiment::RenewalAsymptotics => "renewal-asymptotics",
            Experiment::Membership => "membership",
            Experiment::GibbsValidate => "gibbs-validate",
        }
    }
}

/// Model parameters as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub kappa: f64,
    pub beta: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

/// A complete experiment description; a run is a pure function of it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    /// Extra mean offsets m for the membership experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Vec<f64>>,
    /// δ of the conditional χ moment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub experiment: Experiment,
    pub params: ParamsConfig,
    pub seed: u64,
    pub beta_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub m_grid: Vec<f64>,
    pub chi_delta: f64,
    pub replicas: usize,
    pub n: usize,
    pub steps: u64,
    pub burn_in: u64,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Reads a config file.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Values of `other` replace those of `self` where present.
    pub fn overridden_by(mut self, other: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            experiment, params, seed, beta_grid, eps_grid, m_grid, chi_delta, replicas, n, steps,
            burn_in, out
        );
        self
    }

    /// Fills in the defaults of the chosen experiment.
    pub fn resolve(&self) -> Result<Resolved, Vec<String>> {
        let Some(experiment) = self.experiment else {
            return Err(vec!["experiment must be given".into()]);
        };
        let (params, beta_grid, eps_grid, replicas, n) = match experiment {
            Experiment::GibbsValidate => (
                ParamsConfig {
                    kappa: 2.0,
                    beta: 0.05,
                    l: 10.0,
                },
                vec![],
                vec![],
                20_000,
                40,
            ),
            Experiment::Membership => (default_params(), vec![1e2, 1e3, 1e4], vec![], 100_000, 0),
            Experiment::RenewalAsymptotics => {
                (default_params(), vec![1e3, 1e4, 1e5, 1e6], vec![], 0, 0)
            }
            Experiment::ExpansionSweep => (
                default_params(),
                vec![],
                vec![0.1, 0.05, 0.025, 0.0125],
                0,
                200,
            ),
            Experiment::LocalityAgreement => (
                default_params(),
                vec![],
                vec![0.05, 0.1, 0.2, 0.3],
                10_000,
                0,
            ),
            Experiment::Constants => (default_params(), vec![], vec![], 0, 0),
        };
        let r = Resolved {
            experiment,
            params: self.params.unwrap_or(params),
            seed: self.seed.unwrap_or(1),
            beta_grid: self.beta_grid.clone().unwrap_or(beta_grid),
            eps_grid: self.eps_grid.clone().unwrap_or(eps_grid),
            m_grid: self.m_grid.clone().unwrap_or_default(),
            chi_delta: self
                .chi_delta
                .unwrap_or(droplet_core::estimators::DEFAULT_CHI_DELTA),
            replicas: self.replicas.unwrap_or(replicas),
            n: self.n.unwrap_or(n),
            steps: self.steps.unwrap_or(10_000_000),
            burn_in: self.burn_in.unwrap_or(100_000),
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        };
        let violations = self.violations(&r);
        if violations.is_empty() {
            Ok(r)
        } else {
            Err(violations)
        }
    }

    /// Itemized schema and invariant violations.
    fn violations(&self, r: &Resolved) -> Vec<String> {
        let mut v = Vec::new();
        let p = r.params;
        if !(p.kappa > 1.0 && p.kappa.is_finite()) {
            v.push(format!("kappa must exceed 1, got {}", p.kappa));
        }
        if !(p.beta > 0.0 && p.beta.is_finite()) {
            v.push(format!("beta must be positive, got {}", p.beta));
        }
        if !(p.l > 4.0 && p.l.is_finite()) {
            v.push(format!("L must exceed 4, got {}", p.l));
        }
        if let Ok(rc) = critical_radius(p.kappa) {
            if p.l / 2.0 <= rc || p.l.is_nan() {
                v.push(format!(
                    "L/2 = {} must exceed the critical radius R_c = {rc}",
                    p.l / 2.0
                ));
            }
        }
        let grid = |name: &str, given: &Option<Vec<f64>>, g: &[f64], v: &mut Vec<String>| {
            if given.as_ref().is_some_and(|g| g.is_empty()) {
                v.push(format!("{name} must be nonempty"));
            }
            if g.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                v.push(format!("{name} entries must be positive"));
            }
        };
        grid("beta_grid", &self.beta_grid, &r.beta_grid, &mut v);
        grid("eps_grid", &self.eps_grid, &r.eps_grid, &mut v);
        if self.m_grid.as_ref().is_some_and(|g| g.is_empty()) {
            v.push("m_grid must be nonempty".into());
        }
        if r.m_grid.iter().any(|m| !m.is_finite()) {
            v.push("m_grid entries must be finite".into());
        }
        if r.eps_grid.iter().any(|&e| e >= 1.0) {
            v.push("eps_grid entries must lie in (0, 1)".into());
        }
        if !(r.chi_delta > 0.0 && r.chi_delta.is_finite()) {
            v.push(format!("chi_delta must be positive, got {}", r.chi_delta));
        }
        match r.experiment {
            Experiment::RenewalAsymptotics => {
                if r.beta_grid.len() < 4 {
                    v.push("renewal-asymptotics needs at least 4 beta values".into());
                }
                if r.beta_grid.windows(2).any(|w| w[1] <= w[0]) {
                    v.push("beta_grid must be increasing".into());
                }
            }
            Experiment::Membership => {
                if r.beta_grid.len() < 2 {
                    v.push("membership needs at least 2 beta values".into());
                }
                if r.replicas < 2 * droplet_core::estimators::BATCHES {
                    v.push(format!(
                        "membership needs at least {} replicas",
                        2 * droplet_core::estimators::BATCHES
                    ));
                }
            }
            Experiment::ExpansionSweep | Experiment::LocalityAgreement => {
                if r.eps_grid.is_empty() {
                    v.push("eps_grid must be nonempty".into());
                }
                if r.experiment == Experiment::ExpansionSweep && r.n == 0 {
                    v.push("n (contours per eps) must be positive".into());
                }
                if r.experiment == Experiment::LocalityAgreement && r.replicas < r.eps_grid.len() {
                    v.push("replicas must cover every eps".into());
                }
            }
            Experiment::GibbsValidate => {
                if r.n < 3 {
                    v.push("n (oracle truncation) must be at least 3".into());
                }
                if r.replicas < 2 {
                    v.push("replicas (oracle samples) must be at least 2".into());
                }
                if r.steps < 100 {
                    v.push("steps must be at least 100".into());
                }
            }
            Experiment::Constants => {}
        }
        v
    }
}

fn default_params() -> ParamsConfig {
    ParamsConfig {
        kappa: 2.0,
        beta: 1.0,
        l: 40.0,
    }
}
