//! Serialized shapes. JSON schemas for these live in `schemas/`.

use std::collections::BTreeMap;

use serde::Serialize;

use qfgcpe::chaos::SweepRow;
use qfgcpe::entropy::{EntropyValue, Method};
use qfgcpe::estimator::EstimateResult;
use qfgcpe::orderings::{OrderKind, OrderVerdict, Relation, TheoremReport};
use qfgcpe::QuantileModel;

use crate::Failure;

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("records serialize") + "\n"
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure::Compute(format!("cannot write CSV: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Compute(format!("cannot write CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn params_text(params: &BTreeMap<String, f64>) -> String {
    params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Serialize)]
pub struct EntropyRecord {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub eta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    pub method_used: Method,
    pub value: f64,
    pub est_abs_err: f64,
}

impl EntropyRecord {
    pub fn new(model: &QuantileModel, eta: f64, v: Option<f64>, r: &EntropyValue) -> Self {
        Self {
            model: model.name().to_string(),
            params: model.params().clone(),
            eta,
            v,
            method_used: r.method_used,
            value: r.value,
            est_abs_err: r.est_abs_err,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StaticCsvRow {
    model: String,
    params: String,
    eta: f64,
    method_used: Method,
    value: f64,
    est_abs_err: f64,
}

impl From<&EntropyRecord> for StaticCsvRow {
    fn from(r: &EntropyRecord) -> Self {
        Self {
            model: r.model.clone(),
            params: params_text(&r.params),
            eta: r.eta,
            method_used: r.method_used,
            value: r.value,
            est_abs_err: r.est_abs_err,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DynamicCsvRow {
    model: String,
    params: String,
    eta: f64,
    v: f64,
    method_used: Method,
    value: f64,
    est_abs_err: f64,
}

impl From<&EntropyRecord> for DynamicCsvRow {
    fn from(r: &EntropyRecord) -> Self {
        Self {
            model: r.model.clone(),
            params: params_text(&r.params),
            eta: r.eta,
            v: r.v.unwrap_or(f64::NAN),
            method_used: r.method_used,
            value: r.value,
            est_abs_err: r.est_abs_err,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EstimateRecord {
    pub input: String,
    #[serde(flatten)]
    pub result: EstimateResult,
}

#[derive(Debug, Serialize)]
pub struct EstimateCsvRow {
    input: String,
    n: usize,
    eta: f64,
    point: f64,
    ci_lower: Option<f64>,
    ci_upper: Option<f64>,
    level: Option<f64>,
    n_boot: Option<usize>,
    seed: Option<u64>,
}

impl From<&EstimateRecord> for EstimateCsvRow {
    fn from(r: &EstimateRecord) -> Self {
        let e = &r.result;
        Self {
            input: r.input.clone(),
            n: e.n,
            eta: e.eta,
            point: e.point,
            ci_lower: e.ci.map(|c| c.lower),
            ci_upper: e.ci.map(|c| c.upper),
            level: e.ci.map(|c| c.level),
            n_boot: e.n_boot,
            seed: e.seed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SweepRecord {
    pub x0: f64,
    pub burn_in: usize,
    pub length: usize,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Serialize)]
pub struct VerdictRecord {
    pub kind: OrderKind,
    pub x: String,
    pub y: String,
    pub eta: Option<f64>,
    #[serde(flatten)]
    pub verdict: OrderVerdict,
}

#[derive(Debug, Serialize)]
pub struct VerdictCsvRow {
    kind: OrderKind,
    x: String,
    y: String,
    eta: Option<f64>,
    relation: Relation,
    v: Option<f64>,
    lhs: Option<f64>,
    rhs: Option<f64>,
    grid_size: usize,
}

impl From<&VerdictRecord> for VerdictCsvRow {
    fn from(r: &VerdictRecord) -> Self {
        let w = r.verdict.witness;
        Self {
            kind: r.kind,
            x: r.x.clone(),
            y: r.y.clone(),
            eta: r.eta,
            relation: r.verdict.relation,
            v: w.and_then(|w| w.v),
            lhs: w.map(|w| w.lhs),
            rhs: w.map(|w| w.rhs),
            grid_size: r.verdict.grid_size,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TheoremRecord {
    pub label: String,
    pub eta: f64,
    #[serde(flatten)]
    pub report: TheoremReport,
}

#[derive(Debug, Serialize)]
pub struct TheoremCsvRow {
    label: String,
    eta: f64,
    theorem: String,
    transform: Option<String>,
    applicable: bool,
    hypothesis_holds: bool,
    conclusion_holds: bool,
    falsified: bool,
    detail: String,
}

impl From<&TheoremRecord> for TheoremCsvRow {
    fn from(r: &TheoremRecord) -> Self {
        let t = &r.report;
        Self {
            label: r.label.clone(),
            eta: r.eta,
            theorem: t.theorem.to_string(),
            transform: t.transform.clone(),
            applicable: t.applicable,
            hypothesis_holds: t.hypothesis_holds,
            conclusion_holds: t.conclusion_holds,
            falsified: t.falsified,
            detail: t.detail.clone(),
        }
    }
}
