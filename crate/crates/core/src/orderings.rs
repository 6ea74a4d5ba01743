//! Grid checks of stochastic orders and of the implications between them.
//!
//! Every order is reduced to inequalities `lhs ≤ rhs` evaluated on a grid.
//! A verdict is `Holds` when no inequality is violated, `Inconclusive` when
//! the only violations are within the tolerance band (`tol` relative plus
//! the quadrature error of entropy values), and `Fails` otherwise, with the
//! worst violation as witness. `Holds` therefore means "no counterexample on
//! the grid".

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entropy::{dqfgcpe, qfgcpe, DynamicQuery, EntropyQuery, EntropyValue};
use crate::error::{Error, Result};
use crate::models::{affine, make_model, monotone_map, Curvature, ModelParams, QuantileModel, Transform};
use crate::quadrature::QuadratureControl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderKind {
    /// `H_X(v) ≥ H_Y(v)`
    #[serde(rename = "HQ")]
    Hq,
    /// `R_X(v) ≤ R_Y(v)`
    #[serde(rename = "RHQ")]
    Rhq,
    /// `Q_Y(v) - Q_X(v) ≥ 0`
    #[serde(rename = "disp")]
    Disp,
    #[serde(rename = "QFGCPE")]
    Qfgcpe,
    #[serde(rename = "DQFGCPE")]
    Dqfgcpe,
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderKind::Hq => "HQ",
            OrderKind::Rhq => "RHQ",
            OrderKind::Disp => "disp",
            OrderKind::Qfgcpe => "QFGCPE",
            OrderKind::Dqfgcpe => "DQFGCPE",
        })
    }
}

impl FromStr for OrderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hq" => Ok(OrderKind::Hq),
            "rhq" => Ok(OrderKind::Rhq),
            "disp" => Ok(OrderKind::Disp),
            "qfgcpe" => Ok(OrderKind::Qfgcpe),
            "dqfgcpe" => Ok(OrderKind::Dqfgcpe),
            _ => Err(Error::InvalidArgument(format!(
                "unknown order `{s}` (expected HQ, RHQ, disp, QFGCPE or DQFGCPE)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Holds,
    Fails,
    Inconclusive,
}

/// Point where `lhs ≤ rhs` was required. `v` is absent for QFGCPE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub v: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub witness: Option<Witness>,
    pub grid_size: usize,
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        self.relation == Relation::Holds
    }

    /// Holds or is violated only within tolerance.
    pub fn not_refuted(&self) -> bool {
        self.relation != Relation::Fails
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderOptions {
    /// Points `i / (grid + 1)` used for HQ, RHQ and disp; at least 100.
    pub grid: usize,
    pub eta: Option<f64>,
    /// Points for DQFGCPE; defaults to [`default_v_grid`]`(19)`.
    pub v_grid: Option<Vec<f64>>,
    pub tol: f64,
    pub quad: QuadratureControl,
}

impl Default for OrderOptions {
    fn default() -> Self {
        Self {
            grid: 1000,
            eta: None,
            v_grid: None,
            tol: 1e-10,
            quad: QuadratureControl::default(),
        }
    }
}

impl OrderOptions {
    pub fn with_eta(eta: f64) -> Self {
        Self {
            eta: Some(eta),
            ..Self::default()
        }
    }
}

/// `k / (n + 1)` for `k = 1..=n`.
pub fn default_v_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

fn check_v_grid(v_grid: &[f64], min: usize) -> Result<()> {
    if v_grid.len() < min {
        return Err(Error::InvalidArgument(format!(
            "v grid needs at least {min} points, got {}",
            v_grid.len()
        )));
    }
    if v_grid.iter().any(|&v| !(v > 0.0 && v < 1.0)) || v_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "v grid must be strictly increasing inside (0, 1)".into(),
        ));
    }
    Ok(())
}

struct Point {
    v: Option<f64>,
    lhs: f64,
    rhs: f64,
    err: f64,
}

fn verdict(points: &[Point], tol: f64, grid_size: usize) -> Result<OrderVerdict> {
    let mut relation = Relation::Holds;
    let mut worst: Option<(f64, &Point)> = None;
    for p in points {
        if !(p.lhs.is_finite() && p.rhs.is_finite()) {
            return Err(Error::domain(
                "check_order",
                format!("non-finite comparison at v = {:?}: {} vs {}", p.v, p.lhs, p.rhs),
            ));
        }
        let d = p.rhs - p.lhs;
        if d >= 0.0 {
            continue;
        }
        let scale = p.lhs.abs().max(p.rhs.abs()).max(f64::MIN_POSITIVE);
        let band = tol * scale + p.err;
        if d < -band {
            relation = Relation::Fails;
        } else if relation == Relation::Holds {
            relation = Relation::Inconclusive;
        }
        let rel = d / scale;
        if worst.map_or(true, |(w, _)| rel < w) {
            worst = Some((rel, p));
        }
    }
    Ok(OrderVerdict {
        relation,
        witness: worst.map(|(_, p)| Witness {
            v: p.v,
            lhs: p.lhs,
            rhs: p.rhs,
        }),
        grid_size,
    })
}

fn need_eta(kind: OrderKind, eta: Option<f64>) -> Result<f64> {
    eta.ok_or_else(|| Error::InvalidArgument(format!("order {kind} needs eta")))
}

fn static_value(m: &QuantileModel, eta: f64, quad: &QuadratureControl) -> Result<EntropyValue> {
    qfgcpe(&EntropyQuery::new(m.clone(), eta).with_quadrature(*quad))
}

fn dynamic_value(m: &QuantileModel, eta: f64, v: f64, quad: &QuadratureControl) -> Result<EntropyValue> {
    dqfgcpe(&DynamicQuery::new(
        EntropyQuery::new(m.clone(), eta).with_quadrature(*quad),
        v,
    ))
}

/// Checks `X ≤_kind Y`.
pub fn check_order(kind: OrderKind, x: &QuantileModel, y: &QuantileModel, opts: &OrderOptions) -> Result<OrderVerdict> {
    if opts.grid < 100 {
        return Err(Error::InvalidArgument(format!(
            "grid must have at least 100 points, got {}",
            opts.grid
        )));
    }
    let grid = default_v_grid(opts.grid);
    let pointwise = |f: &dyn Fn(f64) -> Result<(f64, f64)>| -> Result<OrderVerdict> {
        let points = grid
            .iter()
            .map(|&v| {
                f(v).map(|(lhs, rhs)| Point {
                    v: Some(v),
                    lhs,
                    rhs,
                    err: 0.0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        verdict(&points, opts.tol, grid.len())
    };
    match kind {
        OrderKind::Hq => pointwise(&|v| Ok((y.hazard_quantile(v)?, x.hazard_quantile(v)?))),
        OrderKind::Rhq => pointwise(&|v| Ok((x.reversed_hazard_quantile(v)?, y.reversed_hazard_quantile(v)?))),
        OrderKind::Disp => pointwise(&|v| Ok((x.quantile(v), y.quantile(v)))),
        OrderKind::Qfgcpe => {
            let eta = need_eta(kind, opts.eta)?;
            let a = static_value(x, eta, &opts.quad)?;
            let b = static_value(y, eta, &opts.quad)?;
            verdict(
                &[Point {
                    v: None,
                    lhs: a.value,
                    rhs: b.value,
                    err: a.est_abs_err + b.est_abs_err,
                }],
                opts.tol,
                1,
            )
        }
        OrderKind::Dqfgcpe => {
            let eta = need_eta(kind, opts.eta)?;
            let vs = opts.v_grid.clone().unwrap_or_else(|| default_v_grid(19));
            check_v_grid(&vs, 2)?;
            let points = vs
                .iter()
                .map(|&v| {
                    let a = dynamic_value(x, eta, v, &opts.quad)?;
                    let b = dynamic_value(y, eta, v, &opts.quad)?;
                    Ok(Point {
                        v: Some(v),
                        lhs: a.value,
                        rhs: b.value,
                        err: a.est_abs_err + b.est_abs_err,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            verdict(&points, opts.tol, vs.len())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    #[serde(rename = "IDQFGCPE")]
    Increasing,
    #[serde(rename = "DDQFGCPE")]
    Decreasing,
    #[serde(rename = "neither")]
    Neither,
}

/// Monotonicity of `v ↦ CPξ(X, v)` from finite differences on `v_grid`.
///
/// Differences within `1e-9` (plus quadrature error) count as flat; a
/// curve that is flat everywhere is reported as increasing.
pub fn classify_dqfgcpe_monotonicity(
    model: &QuantileModel,
    eta: f64,
    v_grid: &[f64],
    quad: &QuadratureControl,
) -> Result<Monotonicity> {
    check_v_grid(v_grid, 50)?;
    let values = v_grid
        .iter()
        .map(|&v| dynamic_value(model, eta, v, quad))
        .collect::<Result<Vec<_>>>()?;
    let mut up = true;
    let mut down = true;
    for w in values.windows(2) {
        let d = w[1].value - w[0].value;
        let band = 1e-9 + w[0].est_abs_err + w[1].est_abs_err;
        if d < -band {
            up = false;
        }
        if d > band {
            down = false;
        }
    }
    Ok(match (up, down) {
        (true, _) => Monotonicity::Increasing,
        (false, true) => Monotonicity::Decreasing,
        (false, false) => Monotonicity::Neither,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// `X ≤_HQ Y` or `X ≥_RHQ Y` ⇒ `X ≤_QFGCPE Y`.
    T2_2,
    /// Concave Ψ: `X ≤_RHQ Y`, `X ≤_disp Y` ⇒ `Ψ(X) ≥_QFGCPE Ψ(Y)`;
    /// convex Ψ: `X ≤_HQ Y`, `X ≤_disp Y` ⇒ `Ψ(X) ≤_QFGCPE Ψ(Y)`.
    T2_3,
    /// Convex (concave) Ψ preserves IDQFGCPE (DDQFGCPE).
    T3_2,
    /// `X ≤_disp Y` ⇒ `X ≤_DQFGCPE Y`.
    T3_3,
    /// Convex Ψ: `X ≤_DQFGCPE Y` ⇒ `Ψ(X) ≤_DQFGCPE Ψ(Y)`.
    T3_4,
}

impl Theorem {
    pub const ALL: [Theorem; 5] = [Theorem::T2_2, Theorem::T2_3, Theorem::T3_2, Theorem::T3_3, Theorem::T3_4];
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('.', "_").as_str() {
            "T2_2" => Ok(Theorem::T2_2),
            "T2_3" => Ok(Theorem::T2_3),
            "T3_2" => Ok(Theorem::T3_2),
            "T3_3" => Ok(Theorem::T3_3),
            "T3_4" => Ok(Theorem::T3_4),
            _ => Err(Error::InvalidArgument(format!(
                "unknown theorem `{s}` (expected T2_2, T2_3, T3_2, T3_3 or T3_4)"
            ))),
        }
    }
}

/// Inputs for one theorem check. `psi` is required by T2_3, T3_2 and T3_4.
#[derive(Debug, Clone)]
pub struct TheoremInputs {
    pub x: QuantileModel,
    pub y: QuantileModel,
    pub psi: Option<Transform>,
    pub eta: f64,
    pub options: OrderOptions,
    /// Grid for the IDQFGCPE/DDQFGCPE classification (at least 50 points).
    pub class_grid: Vec<f64>,
}

impl TheoremInputs {
    pub fn new(x: QuantileModel, y: QuantileModel, eta: f64) -> Self {
        Self {
            x,
            y,
            psi: None,
            eta,
            options: OrderOptions::with_eta(eta),
            class_grid: default_v_grid(50),
        }
    }

    pub fn with_psi(mut self, psi: Transform) -> Self {
        self.psi = Some(psi);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub transform: Option<String>,
    /// False when the theorem says nothing about these inputs (e.g. T3_4
    /// with a concave Ψ).
    pub applicable: bool,
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
    pub consistent: bool,
    pub falsified: bool,
    pub detail: String,
}

impl TheoremReport {
    fn new(theorem: Theorem, psi: Option<&Transform>, hypothesis: bool, conclusion: bool, detail: String) -> Self {
        let falsified = hypothesis && !conclusion;
        Self {
            theorem,
            transform: psi.map(|p| p.name().to_string()),
            applicable: true,
            hypothesis_holds: hypothesis,
            conclusion_holds: conclusion,
            consistent: !falsified,
            falsified,
            detail,
        }
    }

    fn not_applicable(theorem: Theorem, psi: Option<&Transform>, detail: String) -> Self {
        Self {
            theorem,
            transform: psi.map(|p| p.name().to_string()),
            applicable: false,
            hypothesis_holds: false,
            conclusion_holds: true,
            consistent: true,
            falsified: false,
            detail,
        }
    }
}

fn describe(v: &OrderVerdict) -> String {
    match (v.relation, v.witness) {
        (Relation::Holds, _) => "holds".into(),
        (r, Some(w)) => match w.v {
            Some(at) => format!("{r:?} at v = {at:.6} ({:.9e} vs {:.9e})", w.lhs, w.rhs).to_lowercase(),
            None => format!("{r:?} ({:.9e} vs {:.9e})", w.lhs, w.rhs).to_lowercase(),
        },
        (r, None) => format!("{r:?}").to_lowercase(),
    }
}

fn need_psi(theorem: Theorem, psi: &Option<Transform>) -> Result<&Transform> {
    psi.as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("{theorem} needs a transform")))
}

/// Evaluates the hypothesis and conclusion of `theorem` on `inputs`.
///
/// A hypothesis counts only when it holds outright; a conclusion counts as
/// satisfied unless it fails beyond tolerance.
pub fn check_theorem_implication(theorem: Theorem, inputs: &TheoremInputs) -> Result<TheoremReport> {
    let TheoremInputs {
        x, y, psi, eta, options, class_grid,
    } = inputs;
    let opts = OrderOptions {
        eta: Some(*eta),
        ..options.clone()
    };
    let order = |k, a: &QuantileModel, b: &QuantileModel| check_order(k, a, b, &opts);
    match theorem {
        Theorem::T2_2 => {
            let hq = order(OrderKind::Hq, x, y)?;
            let rhq = order(OrderKind::Rhq, y, x)?;
            let concl = order(OrderKind::Qfgcpe, x, y)?;
            Ok(TheoremReport::new(
                theorem,
                None,
                hq.holds() || rhq.holds(),
                concl.not_refuted(),
                format!(
                    "HQ(X,Y) {}; RHQ(Y,X) {}; QFGCPE(X,Y) {}",
                    describe(&hq),
                    describe(&rhq),
                    describe(&concl)
                ),
            ))
        }
        Theorem::T2_3 => {
            let psi = need_psi(theorem, psi)?;
            let disp = order(OrderKind::Disp, x, y)?;
            let px = monotone_map(x, psi)?;
            let py = monotone_map(y, psi)?;
            match psi.curvature() {
                Curvature::Concave => {
                    let rhq = order(OrderKind::Rhq, x, y)?;
                    let concl = order(OrderKind::Qfgcpe, &py, &px)?;
                    Ok(TheoremReport::new(
                        theorem,
                        Some(psi),
                        rhq.holds() && disp.holds(),
                        concl.not_refuted(),
                        format!(
                            "RHQ(X,Y) {}; disp(X,Y) {}; QFGCPE(Ψ(Y),Ψ(X)) {}",
                            describe(&rhq),
                            describe(&disp),
                            describe(&concl)
                        ),
                    ))
                }
                Curvature::Convex | Curvature::Linear => {
                    let hq = order(OrderKind::Hq, x, y)?;
                    let concl = order(OrderKind::Qfgcpe, &px, &py)?;
                    Ok(TheoremReport::new(
                        theorem,
                        Some(psi),
                        hq.holds() && disp.holds(),
                        concl.not_refuted(),
                        format!(
                            "HQ(X,Y) {}; disp(X,Y) {}; QFGCPE(Ψ(X),Ψ(Y)) {}",
                            describe(&hq),
                            describe(&disp),
                            describe(&concl)
                        ),
                    ))
                }
                Curvature::Unknown => Ok(TheoremReport::not_applicable(
                    theorem,
                    Some(psi),
                    "transform is neither convex nor concave".into(),
                )),
            }
        }
        Theorem::T3_2 => {
            let psi = need_psi(theorem, psi)?;
            let wanted = match psi.curvature() {
                Curvature::Convex | Curvature::Linear => Monotonicity::Increasing,
                Curvature::Concave => Monotonicity::Decreasing,
                Curvature::Unknown => {
                    return Ok(TheoremReport::not_applicable(
                        theorem,
                        Some(psi),
                        "transform is neither convex nor concave".into(),
                    ))
                }
            };
            let before = classify_dqfgcpe_monotonicity(x, *eta, class_grid, &opts.quad)?;
            let after = classify_dqfgcpe_monotonicity(&monotone_map(x, psi)?, *eta, class_grid, &opts.quad)?;
            Ok(TheoremReport::new(
                theorem,
                Some(psi),
                before == wanted,
                after == wanted,
                format!("X is {before:?}; Ψ(X) is {after:?}; preserved class {wanted:?}"),
            ))
        }
        Theorem::T3_3 => {
            let disp = order(OrderKind::Disp, x, y)?;
            let concl = order(OrderKind::Dqfgcpe, x, y)?;
            Ok(TheoremReport::new(
                theorem,
                None,
                disp.holds(),
                concl.not_refuted(),
                format!("disp(X,Y) {}; DQFGCPE(X,Y) {}", describe(&disp), describe(&concl)),
            ))
        }
        Theorem::T3_4 => {
            let psi = need_psi(theorem, psi)?;
            if !matches!(psi.curvature(), Curvature::Convex | Curvature::Linear) {
                return Ok(TheoremReport::not_applicable(
                    theorem,
                    Some(psi),
                    "the statement covers convex transforms only".into(),
                ));
            }
            let hyp = order(OrderKind::Dqfgcpe, x, y)?;
            let concl = order(OrderKind::Dqfgcpe, &monotone_map(x, psi)?, &monotone_map(y, psi)?)?;
            Ok(TheoremReport::new(
                theorem,
                Some(psi),
                hyp.holds(),
                concl.not_refuted(),
                format!("DQFGCPE(X,Y) {}; DQFGCPE(Ψ(X),Ψ(Y)) {}", describe(&hyp), describe(&concl)),
            ))
        }
    }
}

/// A model pair with the transforms used to exercise the theorems.
#[derive(Debug, Clone)]
pub struct CuratedPair {
    pub label: String,
    pub x: QuantileModel,
    pub y: QuantileModel,
    pub eta: f64,
    pub convex: Transform,
    pub concave: Transform,
}

/// Ten pairs spanning the catalog: scale families compared within
/// themselves, plus three cross-family pairs.
pub fn curated_suite() -> Result<Vec<CuratedPair>> {
    use ModelParams::*;
    let pair = |label: &str, x, y, eta, concave: Transform| -> Result<CuratedPair> {
        Ok(CuratedPair {
            label: label.into(),
            x: make_model(x)?,
            y: make_model(y)?,
            eta,
            convex: Transform::square(),
            concave,
        })
    };
    vec![
        pair("exponential(2) vs exponential(1)", Exponential { lambda: 2.0 }, Exponential { lambda: 1.0 }, 0.5, Transform::log1p()),
        pair("uniform(1) vs uniform(2)", Uniform { b: 1.0 }, Uniform { b: 2.0 }, 1.0, Transform::sqrt()),
        pair("power(1,2) vs power(2,2)", Power { a: 1.0, b: 2.0 }, Power { a: 2.0, b: 2.0 }, 0.5, Transform::sqrt()),
        pair("half_logistic(1) vs half_logistic(2)", HalfLogistic { k: 1.0 }, HalfLogistic { k: 2.0 }, 0.75, Transform::log1p()),
        pair("frechet(4,1) vs frechet(4,2)", Frechet { a: 4.0, b: 1.0 }, Frechet { a: 4.0, b: 2.0 }, 1.5, Transform::log1p()),
        pair(
            "govindarajalu(1,2,2) vs govindarajalu(1,3,2)",
            Govindarajalu { alpha: 1.0, beta: 2.0, gamma: 2.0 },
            Govindarajalu { alpha: 1.0, beta: 3.0, gamma: 2.0 },
            0.75,
            Transform::log1p(),
        ),
        {
            // Anchored Davies quantiles dip below zero for v < 1e-12.
            let lift = |p| affine(&make_model(p)?, 1.0, 1.0);
            Ok(CuratedPair {
                label: "1 + davies(1,-1,0) vs 1 + davies(2,-1,0)".into(),
                x: lift(Davies { k: 1.0, a: -1.0, b: 0.0 })?,
                y: lift(Davies { k: 2.0, a: -1.0, b: 0.0 })?,
                eta: 0.5,
                convex: Transform::square(),
                concave: Transform::sqrt(),
            })
        },
        pair("uniform(1) vs exponential(1)", Uniform { b: 1.0 }, Exponential { lambda: 1.0 }, 0.5, Transform::log1p()),
        pair("exponential(1) vs half_logistic(1)", Exponential { lambda: 1.0 }, HalfLogistic { k: 1.0 }, 0.5, Transform::log1p()),
        pair("uniform(1) vs power(1,2)", Uniform { b: 1.0 }, Power { a: 1.0, b: 2.0 }, 0.5, Transform::sqrt()),
    ]
    .into_iter()
    .collect()
}

/// Every applicable theorem check for one curated pair.
pub fn check_pair(pair: &CuratedPair) -> Result<Vec<TheoremReport>> {
    let base = TheoremInputs::new(pair.x.clone(), pair.y.clone(), pair.eta);
    let mut out = vec![
        check_theorem_implication(Theorem::T2_2, &base)?,
        check_theorem_implication(Theorem::T3_3, &base)?,
    ];
    for psi in [&pair.convex, &pair.concave] {
        let inputs = base.clone().with_psi(psi.clone());
        for t in [Theorem::T2_3, Theorem::T3_2, Theorem::T3_4] {
            out.push(check_theorem_implication(t, &inputs)?);
        }
    }
    Ok(out)
}
