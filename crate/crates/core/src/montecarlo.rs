//! Simulation harness: bias, MSE and bootstrap coverage of the estimator.
//!
//! Replication `r` at sample size `n` draws from stream
//! [`rng::replication_id`]`(n, r)` of the `(seed, Replication)` keystream; its
//! nested bootstrap, if any, is seeded from the same id under
//! [`Purpose::NestedSeed`]. Replications run in parallel and are aggregated
//! in replication order with compensated summation, so a report depends only
//! on its scenario.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{qfgcpe, EntropyQuery, Method};
use crate::error::{Error, Result};
use crate::estimator::{bootstrap_interval, validate_bootstrap, EstimatorWeights};
use crate::models::QuantileModel;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    /// Resamples per replication.
    pub b: usize,
    pub level: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: QuantileModel,
    pub eta: f64,
    pub n_grid: Vec<usize>,
    pub n_sim: usize,
    pub bootstrap: Option<BootstrapSpec>,
    pub seed: u64,
}

impl Scenario {
    pub fn new(model: QuantileModel, eta: f64, n_grid: Vec<usize>, n_sim: usize, seed: u64) -> Self {
        Self {
            model,
            eta,
            n_grid,
            n_sim,
            bootstrap: None,
            seed,
        }
    }

    pub fn with_bootstrap(mut self, b: usize, level: f64) -> Self {
        self.bootstrap = Some(BootstrapSpec { b, level });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sim < 1 {
            return Err(Error::InvalidArgument("n_sim must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::InvalidArgument("n_grid must not be empty".into()));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidArgument(format!(
                "every sample size must be at least 2, got {n}"
            )));
        }
        if self.n_grid.iter().any(|&n| n > u32::MAX as usize) || self.n_sim > u32::MAX as usize {
            return Err(Error::InvalidArgument("sample sizes and n_sim must fit in 32 bits".into()));
        }
        if let Some(bs) = self.bootstrap {
            validate_bootstrap(bs.level, bs.b)?;
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta = {} must be positive", self.eta)));
        }
        Ok(())
    }
}

/// One row per sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub mean_empirical: f64,
    pub bias: f64,
    pub mse: f64,
    pub rmse: f64,
    pub theoretical: f64,
    pub coverage: Option<f64>,
    pub mcse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub eta: f64,
    pub seed: u64,
    pub n_sim: usize,
    pub bootstrap_b: Option<usize>,
    pub level: Option<f64>,
    pub theoretical_method: Method,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub provenance: Provenance,
    pub rows: Vec<ReportRow>,
}

/// Neumaier-compensated sum.
fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Aggregates replication outcomes into a row.
pub fn summarize(n: usize, theoretical: f64, estimates: &[f64], covered: Option<&[bool]>) -> ReportRow {
    let m = estimates.len() as f64;
    let mean = compensated_sum(estimates.iter().copied()) / m;
    let mse = compensated_sum(estimates.iter().map(|e| (e - theoretical) * (e - theoretical))) / m;
    let coverage = covered.map(|c| c.iter().filter(|&&x| x).count() as f64 / m);
    ReportRow {
        n,
        mean_empirical: mean,
        bias: mean - theoretical,
        mse,
        rmse: mse.sqrt(),
        theoretical,
        coverage,
        mcse: coverage.map(|p| (p * (1.0 - p) / m).sqrt()),
    }
}

fn scenario_error(sc: &Scenario, n: Option<usize>, e: Error) -> Error {
    let at = match n {
        Some(n) => format!("scenario {} eta = {} n = {n}", sc.model, sc.eta),
        None => format!("scenario {} eta = {}", sc.model, sc.eta),
    };
    match e {
        Error::Divergence { routine, detail } => Error::Divergence {
            routine,
            detail: format!("{at}: {detail}"),
        },
        Error::NonConvergence { routine, detail } => Error::NonConvergence {
            routine,
            detail: format!("{at}: {detail}"),
        },
        Error::Domain { routine, detail } => Error::Domain {
            routine,
            detail: format!("{at}: {detail}"),
        },
        Error::InvalidArgument(detail) => Error::InvalidArgument(format!("{at}: {detail}")),
        Error::InvalidSample(detail) => Error::InvalidSample(format!("{at}: {detail}")),
        other => other,
    }
}

/// Runs every sample size of the scenario.
pub fn run_scenario(sc: &Scenario) -> Result<SimulationReport> {
    sc.validate()?;
    let truth = qfgcpe(&EntropyQuery::new(sc.model.clone(), sc.eta)).map_err(|e| scenario_error(sc, None, e))?;
    let theoretical = truth.value;
    let mut rows = Vec::with_capacity(sc.n_grid.len());
    for &n in &sc.n_grid {
        let weights = EstimatorWeights::new(n, sc.eta).map_err(|e| scenario_error(sc, Some(n), e))?;
        let outcomes: Vec<(f64, bool)> = (0..sc.n_sim)
            .into_par_iter()
            .map(|r| {
                let id = rng::replication_id(n, r);
                let mut stream = rng::stream(sc.seed, Purpose::Replication, id);
                let mut x = sc.model.draw(&mut stream, n);
                x.sort_by(f64::total_cmp);
                let est = weights.apply(&x);
                let covered = match sc.bootstrap {
                    Some(bs) => {
                        let seed = rng::derive_seed(sc.seed, Purpose::NestedSeed, id);
                        bootstrap_interval(&weights, &x, bs.level, bs.b, seed, false).contains(theoretical)
                    }
                    None => false,
                };
                (est, covered)
            })
            .collect();
        if let Some(bad) = outcomes.iter().find(|(e, _)| !e.is_finite()) {
            return Err(scenario_error(
                sc,
                Some(n),
                Error::non_convergence("montecarlo", format!("non-finite estimate {}", bad.0)),
            ));
        }
        let estimates: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
        let covered: Vec<bool> = outcomes.iter().map(|o| o.1).collect();
        rows.push(summarize(
            n,
            theoretical,
            &estimates,
            sc.bootstrap.map(|_| covered.as_slice()),
        ));
    }
    let report = SimulationReport {
        provenance: Provenance {
            model: sc.model.name().to_string(),
            params: sc.model.params().clone(),
            eta: sc.eta,
            seed: sc.seed,
            n_sim: sc.n_sim,
            bootstrap_b: sc.bootstrap.map(|b| b.b),
            level: sc.bootstrap.map(|b| b.level),
            theoretical_method: truth.method_used,
            generator: "ChaCha8 (rand_chacha 0.3); replication stream (n << 32) | r".into(),
        },
        rows,
    };
    report.check_consistency()?;
    Ok(report)
}

impl SimulationReport {
    /// Checks the identities every row must satisfy.
    pub fn check_consistency(&self) -> Result<()> {
        for row in &self.rows {
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
            let mut ok = close(row.rmse, row.mse.sqrt())
                && close(row.bias, row.mean_empirical - row.theoretical)
                && row.coverage.is_some() == row.mcse.is_some();
            if let (Some(p), Some(se)) = (row.coverage, row.mcse) {
                ok &= (0.0..=1.0).contains(&p)
                    && close(se, (p * (1.0 - p) / self.provenance.n_sim as f64).sqrt());
            }
            if !ok {
                return Err(Error::InvalidArgument(format!("inconsistent report row {row:?}")));
            }
        }
        Ok(())
    }
}

pub const CSV_HEADER: &str = "n,mean_empirical,bias,mse,rmse,theoretical,coverage,mcse";

/// Rows as CSV; absent bootstrap fields are empty cells.
pub fn report_to_csv(report: &SimulationReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        w.serialize(row).expect("serializing plain numbers cannot fail");
    }
    if report.rows.is_empty() {
        return format!("{CSV_HEADER}\n");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV output is ASCII")
}

/// Parses rows written by [`report_to_csv`].
pub fn rows_from_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| Error::InvalidArgument(format!("bad CSV: {e}")))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(Error::InvalidArgument(format!("unexpected CSV header `{header}`")));
    }
    r.deserialize()
        .collect::<std::result::Result<Vec<ReportRow>, _>>()
        .map_err(|e| Error::InvalidArgument(format!("bad CSV row: {e}")))
}

pub fn report_to_json(report: &SimulationReport) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize")
}

pub fn report_from_json(text: &str) -> Result<SimulationReport> {
    serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("bad report JSON: {e}")))
}
