use std::collections::BTreeMap;

use gibbs_discovery::data_sim::{Method, SimulationReport, ValidationReport};
use gibbs_discovery::{DiscoveryEstimate, FitResult, PriorSpec};
use serde::Serialize;

/// Serializable form of a fitted or supplied prior.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorReport {
    Pd { sigma: f64, theta: f64 },
    Gg { sigma: f64, tau: f64 },
}

impl PriorReport {
    pub fn new(prior: &PriorSpec) -> Self {
        match *prior {
            PriorSpec::PitmanYor { sigma, theta } => PriorReport::Pd { sigma, theta },
            PriorSpec::GeneralizedGamma { sigma, tau } => PriorReport::Gg { sigma, tau },
            PriorSpec::Generic { .. } => unreachable!("the command line only builds PD and GG priors"),
        }
    }

    fn columns(&self) -> (&'static str, f64, &'static str, f64) {
        match *self {
            PriorReport::Pd { sigma, theta } => ("pd", sigma, "theta", theta),
            PriorReport::Gg { sigma, tau } => ("gg", sigma, "tau", tau),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub n: u64,
    pub k: u64,
    pub prior: PriorReport,
    pub log_likelihood: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub multi_start_spread: f64,
}

impl FitReport {
    pub fn new(n: u64, k: u64, fit: &FitResult) -> Self {
        FitReport {
            n,
            k,
            prior: PriorReport::new(&fit.prior),
            log_likelihood: fit.log_likelihood,
            converged: fit.converged,
            evaluations: fit.evaluations,
            multi_start_spread: fit.multi_start_spread,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EstimateReport {
    pub n: u64,
    pub k: u64,
    pub prior: PriorReport,
    pub fitted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    pub estimates: Vec<DiscoveryEstimate>,
}

#[derive(Debug, Serialize)]
pub struct ValidateReport {
    #[serde(flatten)]
    pub report: ValidationReport,
    pub residual_k: i64,
    pub residual_n: i64,
}

impl ValidateReport {
    pub fn new(report: ValidationReport) -> Self {
        let (residual_k, residual_n) = report.residuals();
        ValidateReport { report, residual_k, residual_n }
    }
}

/// A report that can be written as JSON and, when tabular, as CSV.
pub trait Tabular: Serialize {
    fn rows(&self) -> (Vec<String>, Vec<Vec<String>>);
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Tabular for FitReport {
    fn rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let (kind, sigma, name, second) = self.prior.columns();
        let header = ["n", "k", "prior", "sigma", name, "log_likelihood", "converged", "evaluations"];
        let row = vec![
            self.n.to_string(),
            self.k.to_string(),
            kind.to_string(),
            num(sigma),
            num(second),
            num(self.log_likelihood),
            self.converged.to_string(),
            self.evaluations.to_string(),
        ];
        (header.map(String::from).to_vec(), vec![row])
    }
}

impl Tabular for EstimateReport {
    fn rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let header = ["l", "method", "value", "lo", "hi", "level"];
        let rows = self
            .estimates
            .iter()
            .map(|e| {
                vec![
                    e.l.to_string(),
                    e.method.as_str().to_string(),
                    num(e.value),
                    opt(e.interval.map(|i| i.lo)),
                    opt(e.interval.map(|i| i.hi)),
                    opt(e.interval.map(|i| i.level)),
                ]
            })
            .collect();
        (header.map(String::from).to_vec(), rows)
    }
}

impl Tabular for ValidateReport {
    fn rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let r = &self.report;
        let header = ["declared_n", "declared_k", "counted_n", "counted_k", "residual_n", "residual_k", "passed"];
        let row = vec![
            r.declared_n.to_string(),
            r.declared_k.to_string(),
            r.counted_n.to_string(),
            r.counted_k.to_string(),
            self.residual_n.to_string(),
            self.residual_k.to_string(),
            r.passed.to_string(),
        ];
        (header.map(String::from).to_vec(), vec![row])
    }
}

fn method_name(m: Method) -> String {
    serde_json::to_value(m).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// One row per replicate.
impl Tabular for SimulationReport {
    fn rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let methods: Vec<Method> = self.replicates.first().map(|r| r.sse.keys().copied().collect()).unwrap_or_default();
        let mut header: Vec<String> =
            ["replicate", "n", "k", "sigma_pd", "theta_pd", "sigma_gg", "tau_gg", "true_new", "r12"]
                .map(String::from)
                .to_vec();
        header.extend(methods.iter().map(|&m| format!("sse_{}", method_name(m))));
        let rows = self
            .replicates
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.replicate.to_string(),
                    r.n.to_string(),
                    r.k.to_string(),
                    num(r.sigma_pd),
                    num(r.theta_pd),
                    opt(r.sigma_gg),
                    opt(r.tau_gg),
                    num(r.true_new),
                    opt(r.r12),
                ];
                let sse: &BTreeMap<Method, f64> = &r.sse;
                row.extend(methods.iter().map(|m| opt(sse.get(m).copied())));
                row
            })
            .collect();
        (header, rows)
    }
}
