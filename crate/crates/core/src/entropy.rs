//! Static and dynamic QFGCPE.
//!
//! ```text
//! CPξ_Q^η(X)    = Γ(η+1)^{-1} ∫₀¹ p (-ln p)^η q(p) dp
//! CPξ_Q^η(X, v) = (v Γ(η+1))^{-1} ∫₀^v p (ln v - ln p)^η q(p) dp
//!               = Γ(η+1)^{-1} ∫₀¹ w (-ln w)^η v q(v w) dw
//! ```
//!
//! Each measure is available as a closed form for the models that have one
//! and by adaptive quadrature for every model. [`Method::Auto`] takes the
//! closed form when it exists and applies, otherwise quadrature, and the
//! returned [`EntropyValue`] says which path produced the number.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ClosedForm, ModelParams, QuantileModel};
use crate::quadrature::{integrate_unit, neg_ln, Integral, QuadratureControl};
use crate::special::{gamma, lerch_phi, riemann_zeta, tricomi_u, SeriesControl, EULER_GAMMA};

/// Queries with `η` below this are rejected.
pub const MIN_ETA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    Auto,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::Auto => "auto",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "closed_form" | "closed" => Ok(Method::ClosedForm),
            "quadrature" => Ok(Method::Quadrature),
            "auto" => Ok(Method::Auto),
            _ => Err(Error::InvalidArgument(format!(
                "unknown method `{s}` (expected closed_form, quadrature or auto)"
            ))),
        }
    }
}

/// One static evaluation.
#[derive(Debug, Clone)]
pub struct EntropyQuery {
    pub model: QuantileModel,
    pub eta: f64,
    pub method: Method,
    pub quad: QuadratureControl,
}

impl EntropyQuery {
    pub fn new(model: QuantileModel, eta: f64) -> Self {
        Self {
            model,
            eta,
            method: Method::Auto,
            quad: QuadratureControl::default(),
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_quadrature(mut self, quad: QuadratureControl) -> Self {
        self.quad = quad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta)?;
        self.quad.validate()
    }
}

/// One dynamic evaluation at `v ∈ (0, 1)`.
#[derive(Debug, Clone)]
pub struct DynamicQuery {
    pub query: EntropyQuery,
    pub v: f64,
}

impl DynamicQuery {
    pub fn new(query: EntropyQuery, v: f64) -> Self {
        Self { query, v }
    }

    pub fn validate(&self) -> Result<()> {
        self.query.validate()?;
        if self.v > 0.0 && self.v < 1.0 {
            Ok(())
        } else {
            Err(Error::domain("dqfgcpe", format!("v = {} is outside (0, 1)", self.v)))
        }
    }
}

/// A computed entropy and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub est_abs_err: f64,
    pub method_used: Method,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta >= MIN_ETA && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            "entropy",
            format!("eta = {eta} must be finite and at least {MIN_ETA}"),
        ))
    }
}

fn closed_value(value: f64) -> EntropyValue {
    EntropyValue {
        value,
        est_abs_err: (1e-14 * value.abs()).max(1e-15),
        method_used: Method::ClosedForm,
    }
}

fn with_context(routine: &'static str, model: &QuantileModel, eta: f64, v: Option<f64>, e: Error) -> Error {
    let at = match v {
        Some(v) => format!("{model}, eta = {eta}, v = {v}"),
        None => format!("{model}, eta = {eta}"),
    };
    match e {
        Error::Divergence { detail, .. } => Error::Divergence {
            routine,
            detail: format!("{at}: {detail}"),
        },
        Error::NonConvergence { detail, .. } => Error::NonConvergence {
            routine,
            detail: format!("{at}: {detail}"),
        },
        Error::Domain { detail, .. } => Error::Domain {
            routine,
            detail: format!("{at}: {detail}"),
        },
        other => other,
    }
}

fn zeta(s: f64) -> Result<f64> {
    riemann_zeta(s, &SeriesControl::precise())
}

/// Closed-form static QFGCPE, or `None` if the model has none.
///
/// Returns an error when the closed form exists but its integral diverges.
pub fn qfgcpe_closed_form(model: &QuantileModel, eta: f64) -> Option<Result<f64>> {
    let s = eta + 1.0;
    let value = match *model.closed_form()? {
        ClosedForm::Catalog(p) => match p {
            ModelParams::Uniform { b } => Ok(b / 2f64.powf(s)),
            ModelParams::Exponential { lambda } => zeta(s).map(|z| (z - 1.0) / lambda),
            ModelParams::Power { a, b } => Ok(a * b.powf(eta) / (b + 1.0).powf(s)),
            ModelParams::HalfLogistic { k } => zeta(s).map(|z| 2f64.powf(-eta) * k * z),
            ModelParams::Frechet { a, b } => {
                if eta <= 1.0 / a {
                    Err(Error::divergence(
                        "qfgcpe",
                        format!("Frechet integral diverges at p -> 1 for eta = {eta} <= 1/a = {}", 1.0 / a),
                    ))
                } else {
                    gamma(eta - 1.0 / a)
                        .and_then(|g| Ok(b.powf(1.0 / a) * g / (a * gamma(s)?)))
                }
            }
            ModelParams::Davies { k, a, b } => {
                let c = a + b;
                if c.abs() <= 1e-12 {
                    Ok(k / (b + 2.0).powf(s))
                } else if (c + 1.0).abs() <= 1e-12 {
                    Ok(k * ((b + 2.0).powf(-s) - (b + 3.0).powf(-s)))
                } else if (c - 1.0).abs() <= 1e-12 && b >= 0.0 && b.fract() == 0.0 {
                    zeta(s).map(|z| {
                        let head: f64 = (1..=(b as u64 + 1)).map(|m| (m as f64).powf(-s)).sum();
                        k * (z - head)
                    })
                } else {
                    return None;
                }
            }
            ModelParams::Govindarajalu { .. } => return None,
        },
        ClosedForm::PrhmPower { a, b, theta } => {
            let bt = b * theta;
            Ok(a * bt.powf(eta) / (1.0 + bt).powf(s))
        }
    };
    Some(value)
}

/// `Γ(η+1)^{-1} ∫₀¹ p (-ln p)^η q(p) dp` by quadrature.
pub fn qfgcpe_quadrature(model: &QuantileModel, eta: f64, ctl: &QuadratureControl) -> Result<Integral> {
    let g = gamma(eta + 1.0)?;
    let r = integrate_unit(
        |p, pc| p * neg_ln(p, pc).powf(eta) * model.density_c(p, pc),
        ctl,
    )?;
    Ok(Integral {
        value: r.value / g,
        abs_err: r.abs_err / g,
        evaluations: r.evaluations,
    })
}

/// Static QFGCPE.
pub fn qfgcpe(query: &EntropyQuery) -> Result<EntropyValue> {
    query.validate()?;
    let EntropyQuery {
        model, eta, method, quad,
    } = query;
    let ctx = |e| with_context("qfgcpe", model, *eta, None, e);
    let by_quadrature = || {
        qfgcpe_quadrature(model, *eta, quad).map(|r| EntropyValue {
            value: r.value,
            est_abs_err: r.abs_err,
            method_used: Method::Quadrature,
        })
    };
    match method {
        Method::Quadrature => by_quadrature().map_err(ctx),
        Method::ClosedForm => match qfgcpe_closed_form(model, *eta) {
            Some(r) => r.map(closed_value).map_err(ctx),
            None => Err(no_closed_form("qfgcpe", model)),
        },
        Method::Auto => match qfgcpe_closed_form(model, *eta) {
            Some(Ok(v)) => Ok(closed_value(v)),
            Some(Err(closed_err)) => by_quadrature().map_err(|_| ctx(closed_err)),
            None => by_quadrature().map_err(ctx),
        },
    }
}

fn no_closed_form(routine: &'static str, model: &QuantileModel) -> Error {
    Error::InvalidArgument(format!("{routine}: no closed form is available for {model}"))
}

/// Closed-form dynamic QFGCPE, or `None` if the model has none.
///
/// Exponential: `v Φ(v, η+1, 2) / λ = (Li_{η+1}(v) - v) / (λ v)`.
/// Fréchet: `(b^{1/a}/a) ℓ^{η-1/a} U(η+1, η+1-1/a, ℓ)` with `ℓ = -ln v`.
pub fn dqfgcpe_closed_form(model: &QuantileModel, eta: f64, v: f64) -> Option<Result<f64>> {
    match model.catalog_params()? {
        ModelParams::Exponential { lambda } => Some(
            lerch_phi(v, eta + 1.0, 2.0, &SeriesControl::precise()).map(|phi| v * phi / lambda),
        ),
        ModelParams::Frechet { a, b } => {
            let l = -v.ln();
            Some(
                tricomi_u(eta + 1.0, eta + 1.0 - 1.0 / a, l)
                    .map(|u| b.powf(1.0 / a) / a * l.powf(eta - 1.0 / a) * u),
            )
        }
        _ => None,
    }
}

/// `Γ(η+1)^{-1} ∫₀¹ w (-ln w)^η v q(v w) dw` by quadrature.
pub fn dqfgcpe_quadrature(
    model: &QuantileModel,
    eta: f64,
    v: f64,
    ctl: &QuadratureControl,
) -> Result<Integral> {
    let g = gamma(eta + 1.0)?;
    let vc = 1.0 - v;
    let r = integrate_unit(
        |w, wc| {
            let p = v * w;
            let pc = vc + v * wc;
            w * neg_ln(w, wc).powf(eta) * v * model.density_c(p, pc)
        },
        ctl,
    )?;
    Ok(Integral {
        value: r.value / g,
        abs_err: r.abs_err / g,
        evaluations: r.evaluations,
    })
}

/// Dynamic QFGCPE.
pub fn dqfgcpe(dq: &DynamicQuery) -> Result<EntropyValue> {
    dq.validate()?;
    let DynamicQuery { query, v } = dq;
    let EntropyQuery {
        model, eta, method, quad,
    } = query;
    let ctx = |e| with_context("dqfgcpe", model, *eta, Some(*v), e);
    let by_quadrature = || {
        dqfgcpe_quadrature(model, *eta, *v, quad).map(|r| EntropyValue {
            value: r.value,
            est_abs_err: r.abs_err,
            method_used: Method::Quadrature,
        })
    };
    match method {
        Method::Quadrature => by_quadrature().map_err(ctx),
        Method::ClosedForm => match dqfgcpe_closed_form(model, *eta, *v) {
            Some(r) => r.map(closed_value).map_err(ctx),
            None => Err(no_closed_form("dqfgcpe", model)),
        },
        Method::Auto => match dqfgcpe_closed_form(model, *eta, *v) {
            Some(Ok(x)) => Ok(closed_value(x)),
            Some(Err(closed_err)) => by_quadrature().map_err(|_| ctx(closed_err)),
            None => by_quadrature().map_err(ctx),
        },
    }
}

/// Quantile form of the Shannon differential entropy, `∫₀¹ ln q(p) dp`.
pub fn quantile_shannon_entropy(model: &QuantileModel, ctl: &QuadratureControl) -> Result<Integral> {
    integrate_unit(|p, pc| model.density_c(p, pc).ln(), ctl)
        .map_err(|e| with_context("quantile_shannon_entropy", model, 0.0, None, e))
}

/// `exp(∫₀¹ ln[p (-ln p)^η] dp) = exp(-1 - ηγ)`.
pub fn d_factor(eta: f64) -> f64 {
    (-1.0 - eta * EULER_GAMMA).exp()
}

/// Shannon-type lower bound `exp(-1 - ηγ) · exp(ξ_Q)`.
///
/// Jensen's inequality gives `Γ(η+1) CPξ ≥ exp(-1 - ηγ + ξ_Q)`, so the bound
/// returned here is guaranteed for `η ≤ 1` (where `Γ(η+1) ≤ 1`); for larger
/// `η` divide it by `Γ(η+1)`.
pub fn qfgcpe_lower_bound(model: &QuantileModel, eta: f64, ctl: &QuadratureControl) -> Result<f64> {
    check_eta(eta)?;
    let xi = quantile_shannon_entropy(model, ctl)?;
    Ok(d_factor(eta) * xi.value.exp())
}

/// Quantile cumulative past entropy `∫₀¹ p (-ln p) q(p) dp`.
pub fn qcpe(model: &QuantileModel, ctl: &QuadratureControl) -> Result<EntropyValue> {
    qfgcpe(&EntropyQuery::new(model.clone(), 1.0).with_quadrature(*ctl))
}

/// Both sides of `∫ p(-ln p)^η q ≤ (∫ p(-ln p) q)^η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBoundReport {
    pub eta: f64,
    /// `Γ(η+1) CPξ_Q^η`
    pub lhs: f64,
    /// `qcpe^η`
    pub rhs: f64,
    pub qcpe: f64,
    pub holds: bool,
}

/// Evaluates the η-power inequality; a violation is reported, not raised.
pub fn power_bound_check(model: &QuantileModel, eta: f64, ctl: &QuadratureControl) -> Result<PowerBoundReport> {
    let q = qfgcpe(&EntropyQuery::new(model.clone(), eta).with_quadrature(*ctl))?;
    let c = qcpe(model, ctl)?;
    let lhs = gamma(eta + 1.0)? * q.value;
    let rhs = c.value.powf(eta);
    Ok(PowerBoundReport {
        eta,
        lhs,
        rhs,
        qcpe: c.value,
        holds: lhs <= rhs * (1.0 + 1e-10),
    })
}
