//! Quantile-defined lifetime models and combinators.
//!
//! A [`QuantileModel`] is a quantile function `Q` together with its density
//! `q = Q'`. Both are evaluated from the pair `(v, 1 - v)` so that forms which
//! blow up at the upper end (exponential, half-logistic, Davies) stay accurate
//! when `v` is within a few ulps of 1. Use [`QuantileModel::quantile`] for the
//! plain single-argument form.
//!
//! Construction checks on a 1000-point grid over `[1e-9, 1 - 1e-9]` that `q`
//! is positive and finite and that `Q` is nondecreasing, and compares `q`
//! with central differences of `Q` at `v = k/102`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, neg_ln};
use crate::rng::{self, Purpose};
use crate::sample::{Sample, SampleSource};

/// Quantile function and quantile density of a model.
///
/// Implementations receive `v` and `vc = 1 - v`; `vc` is accurate even where
/// `1.0 - v` would round.
pub trait QuantileForm: Send + Sync {
    fn quantile(&self, v: f64, vc: f64) -> f64;
    fn density(&self, v: f64, vc: f64) -> f64;
}

/// Parameters of the built-in distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    /// `Q = b v`
    Uniform { b: f64 },
    /// `Q = -ln(1 - v) / λ`
    Exponential { lambda: f64 },
    /// `Q = a v^{1/b}`
    Power { a: f64, b: f64 },
    /// `Q = k ln((1 + v) / (1 - v))`
    HalfLogistic { k: f64 },
    /// `Q = (-b / ln v)^{1/a}`
    Frechet { a: f64, b: f64 },
    /// Only the density is known: `q = K v^b (1 - v)^{-(a+b)}`.
    Davies { k: f64, a: f64, b: f64 },
    /// `Q = α + β((γ+1) v^γ - γ v^{γ+1})`
    Govindarajalu { alpha: f64, beta: f64, gamma: f64 },
}

impl ModelParams {
    pub const KINDS: [&'static str; 7] = [
        "uniform",
        "exponential",
        "power",
        "half_logistic",
        "frechet",
        "davies",
        "govindarajalu",
    ];

    pub fn kind(&self) -> &'static str {
        match self {
            ModelParams::Uniform { .. } => "uniform",
            ModelParams::Exponential { .. } => "exponential",
            ModelParams::Power { .. } => "power",
            ModelParams::HalfLogistic { .. } => "half_logistic",
            ModelParams::Frechet { .. } => "frechet",
            ModelParams::Davies { .. } => "davies",
            ModelParams::Govindarajalu { .. } => "govindarajalu",
        }
    }

    /// Parameter names accepted for `kind`, in display order.
    pub fn keys(kind: &str) -> Option<&'static [&'static str]> {
        Some(match kind {
            "uniform" => &["b"],
            "exponential" => &["lambda"],
            "power" => &["a", "b"],
            "half_logistic" => &["k"],
            "frechet" => &["a", "b"],
            "davies" => &["K", "a", "b"],
            "govindarajalu" => &["alpha", "beta", "gamma"],
            _ => return None,
        })
    }

    /// Builds typed parameters from `key = value` pairs.
    ///
    /// Unknown kinds and keys, repeated keys, missing keys and domain
    /// violations each produce their own message.
    pub fn from_pairs(kind: &str, pairs: &[(String, f64)]) -> Result<Self> {
        let kind = kind.replace('-', "_").to_ascii_lowercase();
        let keys = Self::keys(&kind).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown distribution `{kind}` (expected one of {})",
                Self::KINDS.join(", ")
            ))
        })?;
        let mut map = BTreeMap::new();
        for (key, value) in pairs {
            if !keys.contains(&key.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "unknown parameter `{key}` for {kind} (expected {})",
                    keys.join(", ")
                )));
            }
            if map.insert(key.as_str(), *value).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "parameter `{key}` given more than once"
                )));
            }
        }
        let get = |key: &str| {
            map.get(key).copied().ok_or_else(|| {
                Error::InvalidArgument(format!("missing parameter `{key}` for {kind}"))
            })
        };
        let params = match kind.as_str() {
            "uniform" => ModelParams::Uniform { b: get("b")? },
            "exponential" => ModelParams::Exponential {
                lambda: get("lambda")?,
            },
            "power" => ModelParams::Power {
                a: get("a")?,
                b: get("b")?,
            },
            "half_logistic" => ModelParams::HalfLogistic { k: get("k")? },
            "frechet" => ModelParams::Frechet {
                a: get("a")?,
                b: get("b")?,
            },
            "davies" => ModelParams::Davies {
                k: get("K")?,
                a: get("a")?,
                b: get("b")?,
            },
            "govindarajalu" => ModelParams::Govindarajalu {
                alpha: get("alpha")?,
                beta: get("beta")?,
                gamma: get("gamma")?,
            },
            _ => unreachable!(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Named parameter values, keyed as in [`ModelParams::keys`].
    pub fn named(&self) -> BTreeMap<String, f64> {
        let values: Vec<f64> = match *self {
            ModelParams::Uniform { b } => vec![b],
            ModelParams::Exponential { lambda } => vec![lambda],
            ModelParams::Power { a, b } => vec![a, b],
            ModelParams::HalfLogistic { k } => vec![k],
            ModelParams::Frechet { a, b } => vec![a, b],
            ModelParams::Davies { k, a, b } => vec![k, a, b],
            ModelParams::Govindarajalu { alpha, beta, gamma } => vec![alpha, beta, gamma],
        };
        Self::keys(self.kind())
            .unwrap()
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    /// Checks the parameter domain.
    pub fn validate(&self) -> Result<()> {
        let fail = |constraint: &str| {
            Err(Error::invalid_model(
                self.kind(),
                format!("parameter constraint violated: {constraint} ({})", fmt_params(&self.named())),
            ))
        };
        let finite = self.named().values().all(|x| x.is_finite());
        if !finite {
            return fail("all parameters finite");
        }
        match *self {
            ModelParams::Uniform { b } if !(b > 0.0) => fail("b > 0"),
            ModelParams::Exponential { lambda } if !(lambda > 0.0) => fail("lambda > 0"),
            ModelParams::Power { a, .. } if !(a > 0.0) => fail("a > 0"),
            ModelParams::Power { b, .. } if !(b > 0.0) => fail("b > 0"),
            ModelParams::HalfLogistic { k } if k < 0.0 => fail("k >= 0"),
            ModelParams::HalfLogistic { k: 0.0 } => {
                fail("k > 0 (k = 0 gives a degenerate model with q = 0)")
            }
            ModelParams::Frechet { a, .. } if !(a > 0.0) => fail("a > 0"),
            ModelParams::Frechet { b, .. } if !(b > 0.0) => fail("b > 0"),
            ModelParams::Davies { k, .. } if !(k > 0.0) => fail("K > 0"),
            ModelParams::Davies { b, .. } if !(b > -1.0) => fail("b > -1"),
            ModelParams::Govindarajalu { beta, .. } if !(beta > 0.0) => fail("beta > 0"),
            ModelParams::Govindarajalu { gamma, .. } if !(gamma > 0.0) => fail("gamma > 0"),
            _ => Ok(()),
        }
    }
}

pub(crate) fn fmt_params(params: &BTreeMap<String, f64>) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Models whose QFGCPE has a known closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    Catalog(ModelParams),
    /// Power(a, b) under the proportional reversed hazard model with `θ`.
    PrhmPower { a: f64, b: f64, theta: f64 },
}

/// Anchor of the cumulative quadrature that defines Davies-family `Q`.
pub const DAVIES_ANCHOR: f64 = 1e-12;

const DAVIES_SEEDS: [f64; 3] = [1e-9, 1e-6, 1e-3];

struct Catalog {
    params: ModelParams,
    // ∫ q from the anchor to 1/2, for the Davies family.
    davies_half: f64,
}

impl Catalog {
    fn new(params: ModelParams) -> Self {
        let mut cat = Catalog {
            params,
            davies_half: 0.0,
        };
        if let ModelParams::Davies { .. } = params {
            cat.davies_half = cat.davies_lower(0.5);
        }
        cat
    }

    // ∫_{anchor}^{v} q(p) dp for v ≤ 1/2 (negative below the anchor).
    fn davies_lower(&self, v: f64) -> f64 {
        let f = |p: f64| self.density(p, 1.0 - p);
        let (lo, hi, sign) = if v >= DAVIES_ANCHOR {
            (DAVIES_ANCHOR, v, 1.0)
        } else {
            (v, DAVIES_ANCHOR, -1.0)
        };
        if lo == hi {
            return 0.0;
        }
        let mut pts = vec![lo];
        pts.extend(DAVIES_SEEDS.iter().copied().filter(|&s| s > lo && s < hi));
        pts.push(hi);
        match integrate(f, &pts, 1e-15, 1e-13, 2000) {
            Ok(r) => sign * r.value,
            Err(_) => f64::NAN,
        }
    }

    // ∫_{1/2}^{v} q(p) dp for v > 1/2, integrated in w = 1 - p.
    fn davies_upper(&self, vc: f64) -> f64 {
        let g = |w: f64| self.density(1.0 - w, w);
        let mut pts = vec![vc];
        pts.extend(DAVIES_SEEDS.iter().copied().filter(|&s| s > vc));
        pts.push(0.5);
        match integrate(g, &pts, 1e-15, 1e-13, 2000) {
            Ok(r) => r.value,
            Err(_) => f64::NAN,
        }
    }
}

impl QuantileForm for Catalog {
    fn quantile(&self, v: f64, vc: f64) -> f64 {
        match self.params {
            ModelParams::Uniform { b } => b * v,
            ModelParams::Exponential { lambda } => neg_ln(vc, v) / lambda,
            ModelParams::Power { a, b } => a * v.powf(1.0 / b),
            ModelParams::HalfLogistic { k } => k * (v.ln_1p() + neg_ln(vc, v)),
            ModelParams::Frechet { a, b } => (b / neg_ln(v, vc)).powf(1.0 / a),
            ModelParams::Davies { .. } => {
                if v <= 0.5 {
                    self.davies_lower(v)
                } else {
                    self.davies_half + self.davies_upper(vc)
                }
            }
            ModelParams::Govindarajalu { alpha, beta, gamma } => {
                alpha + beta * v.powf(gamma) * (1.0 + gamma * vc)
            }
        }
    }

    fn density(&self, v: f64, vc: f64) -> f64 {
        match self.params {
            ModelParams::Uniform { b } => b,
            ModelParams::Exponential { lambda } => 1.0 / (lambda * vc),
            ModelParams::Power { a, b } => a / b * v.powf(1.0 / b - 1.0),
            ModelParams::HalfLogistic { k } => 2.0 * k / ((1.0 + v) * vc),
            ModelParams::Frechet { a, b } => {
                let l = neg_ln(v, vc);
                b.powf(1.0 / a) / a * l.powf(-1.0 / a - 1.0) / v
            }
            ModelParams::Davies { k, a, b } => k * v.powf(b) * vc.powf(-(a + b)),
            ModelParams::Govindarajalu { beta, gamma, .. } => {
                beta * gamma * (gamma + 1.0) * v.powf(gamma - 1.0) * vc
            }
        }
    }
}

/// `Q` and `q` supplied as closures of `(v, 1 - v)`.
pub struct FnForm<Q, D> {
    pub quantile: Q,
    pub density: D,
}

impl<Q, D> QuantileForm for FnForm<Q, D>
where
    Q: Fn(f64, f64) -> f64 + Send + Sync,
    D: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn quantile(&self, v: f64, vc: f64) -> f64 {
        (self.quantile)(v, vc)
    }

    fn density(&self, v: f64, vc: f64) -> f64 {
        (self.density)(v, vc)
    }
}

/// Shape of an increasing transformation, used by the ordering theorems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    Linear,
    Convex,
    Concave,
    Unknown,
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An increasing differentiable map `Ψ` with its derivative.
#[derive(Clone)]
pub struct Transform {
    name: String,
    psi: RealFn,
    dpsi: RealFn,
    curvature: Curvature,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform")
            .field("name", &self.name)
            .field("curvature", &self.curvature)
            .finish()
    }
}

impl Transform {
    pub fn new(
        name: impl Into<String>,
        psi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dpsi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        curvature: Curvature,
    ) -> Self {
        Self {
            name: name.into(),
            psi: Arc::new(psi),
            dpsi: Arc::new(dpsi),
            curvature,
        }
    }

    pub fn identity() -> Self {
        Self::new("x", |x| x, |_| 1.0, Curvature::Linear)
    }

    /// `x ↦ a x`, `a > 0`.
    pub fn linear(a: f64) -> Self {
        Self::new(format!("{a}x"), move |x| a * x, move |_| a, Curvature::Linear)
    }

    /// `x ↦ x^β` on `x > 0`.
    pub fn power(beta: f64) -> Self {
        let curvature = if beta == 1.0 {
            Curvature::Linear
        } else if beta > 1.0 {
            Curvature::Convex
        } else {
            Curvature::Concave
        };
        Self::new(
            format!("x^{beta}"),
            move |x| x.powf(beta),
            move |x| beta * x.powf(beta - 1.0),
            curvature,
        )
    }

    pub fn square() -> Self {
        Self::new("x^2", |x| x * x, |x| 2.0 * x, Curvature::Convex)
    }

    pub fn sqrt() -> Self {
        Self::new("sqrt(x)", f64::sqrt, |x| 0.5 / x.sqrt(), Curvature::Concave)
    }

    /// `x ↦ ln(1 + x)` on `x > -1`.
    pub fn log1p() -> Self {
        Self::new("ln(1+x)", f64::ln_1p, |x| 1.0 / (1.0 + x), Curvature::Concave)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    pub fn apply(&self, x: f64) -> f64 {
        (self.psi)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.dpsi)(x)
    }
}

impl std::str::FromStr for Transform {
    type Err = Error;

    /// Accepts `identity`, `square`, `sqrt`, `log1p`, `power:β` and `linear:a`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidArgument(format!(
                "unknown transform `{s}` (expected identity, square, sqrt, log1p, power:<beta> or linear:<a>)"
            ))
        };
        let lower = s.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h, Some(a.trim().parse::<f64>().map_err(|_| bad())?)),
            None => (lower.as_str(), None),
        };
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(Error::InvalidArgument(format!("{what} = {x} must be positive")))
            }
        };
        match (head, arg) {
            ("identity" | "x", None) => Ok(Self::identity()),
            ("square" | "x^2", None) => Ok(Self::square()),
            ("sqrt", None) => Ok(Self::sqrt()),
            ("log1p" | "ln(1+x)", None) => Ok(Self::log1p()),
            ("power", Some(b)) => Ok(Self::power(positive(b, "power exponent")?)),
            ("linear", Some(a)) => Ok(Self::linear(positive(a, "linear slope")?)),
            _ => Err(bad()),
        }
    }
}

/// A validated quantile model.
#[derive(Clone)]
pub struct QuantileModel {
    name: String,
    params: BTreeMap<String, f64>,
    form: Arc<dyn QuantileForm>,
    closed: Option<ClosedForm>,
    support: Option<(f64, f64)>,
}

impl fmt::Debug for QuantileModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuantileModel")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("closed", &self.closed)
            .field("support", &self.support)
            .finish()
    }
}

impl fmt::Display for QuantileModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.params.is_empty() {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}({})", self.name, fmt_params(&self.params))
        }
    }
}

/// Grid used for the construction checks.
const CHECK_LO: f64 = 1e-9;
const CHECK_HI: f64 = 1.0 - 1e-9;
const CHECK_POINTS: usize = 1000;

fn check_grid() -> impl Iterator<Item = (f64, f64)> {
    (0..CHECK_POINTS).map(|i| {
        let v = CHECK_LO + (CHECK_HI - CHECK_LO) * i as f64 / (CHECK_POINTS - 1) as f64;
        (v, 1.0 - v)
    })
}

impl QuantileModel {
    /// Builds a catalog model.
    pub fn from_params(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let support = match params {
            ModelParams::Uniform { b } => Some((0.0, b)),
            ModelParams::Power { a, .. } => Some((0.0, a)),
            ModelParams::Exponential { .. }
            | ModelParams::HalfLogistic { .. }
            | ModelParams::Frechet { .. } => Some((0.0, f64::INFINITY)),
            ModelParams::Govindarajalu { alpha, beta, .. } => Some((alpha, alpha + beta)),
            ModelParams::Davies { .. } => None,
        };
        let derivative_tol = match params {
            ModelParams::Davies { .. } => 1e-3,
            _ => 1e-4,
        };
        let model = QuantileModel {
            name: params.kind().to_string(),
            params: params.named(),
            form: Arc::new(Catalog::new(params)),
            closed: Some(ClosedForm::Catalog(params)),
            support,
        };
        model.check(derivative_tol)?;
        Ok(model)
    }

    /// Builds a model from an arbitrary form and validates it.
    pub fn from_form(
        name: impl Into<String>,
        params: BTreeMap<String, f64>,
        form: Arc<dyn QuantileForm>,
        support: Option<(f64, f64)>,
    ) -> Result<Self> {
        let model = QuantileModel {
            name: name.into(),
            params,
            form,
            closed: None,
            support,
        };
        model.check(1e-4)?;
        Ok(model)
    }

    /// A user-defined model from closures of `(v, 1 - v)`.
    pub fn custom<Q, D>(name: impl Into<String>, quantile: Q, density: D) -> Result<Self>
    where
        Q: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_form(
            name,
            BTreeMap::new(),
            Arc::new(FnForm { quantile, density }),
            None,
        )
    }

    fn check(&self, derivative_tol: f64) -> Result<()> {
        let bad = |detail: String| Err(Error::invalid_model(self.to_string(), detail));
        let mut prev: Option<(f64, f64)> = None;
        for (v, vc) in check_grid() {
            let q = self.form.density(v, vc);
            if !(q > 0.0 && q.is_finite()) {
                return bad(format!("quantile density must be positive and finite; q({v:e}) = {q}"));
            }
            let big_q = self.form.quantile(v, vc);
            if !big_q.is_finite() {
                return bad(format!("quantile function is not finite at v = {v:e}"));
            }
            if let Some((pv, pq)) = prev {
                let slack = 1e-12 * pq.abs().max(big_q.abs());
                if big_q < pq - slack {
                    return bad(format!(
                        "quantile function decreases between v = {pv:e} ({pq}) and v = {v:e} ({big_q})"
                    ));
                }
            }
            prev = Some((v, big_q));
        }
        let h = 1e-6;
        for k in 1..=101 {
            let v = k as f64 / 102.0;
            let (vp, vm) = (v + h, v - h);
            let (qp, qm) = (self.form.quantile(vp, 1.0 - vp), self.form.quantile(vm, 1.0 - vm));
            let num = (qp - qm) / (vp - vm);
            let q = self.form.density(v, 1.0 - v);
            let roundoff = 64.0 * f64::EPSILON * qp.abs().max(qm.abs()) / (vp - vm);
            if !((num - q).abs() <= derivative_tol * q.abs() + roundoff) {
                return bad(format!(
                    "quantile density disagrees with the derivative of Q at v = {v:.6}: q = {q}, finite difference = {num}"
                ));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn support_hint(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed.as_ref()
    }

    /// Catalog parameters, if this model came straight from [`QuantileModel::from_params`].
    pub fn catalog_params(&self) -> Option<&ModelParams> {
        match &self.closed {
            Some(ClosedForm::Catalog(p)) => Some(p),
            _ => None,
        }
    }

    pub fn form(&self) -> &Arc<dyn QuantileForm> {
        &self.form
    }

    pub fn quantile(&self, v: f64) -> f64 {
        self.form.quantile(v, 1.0 - v)
    }

    pub fn density(&self, v: f64) -> f64 {
        self.form.density(v, 1.0 - v)
    }

    /// `Q(v)` with the complement supplied by the caller.
    pub fn quantile_c(&self, v: f64, vc: f64) -> f64 {
        self.form.quantile(v, vc)
    }

    /// `q(v)` with the complement supplied by the caller.
    pub fn density_c(&self, v: f64, vc: f64) -> f64 {
        self.form.density(v, vc)
    }

    /// `H(v) = 1 / ((1 - v) q(v))`
    pub fn hazard_quantile(&self, v: f64) -> Result<f64> {
        open_unit_arg("hazard_quantile", v)?;
        Ok(1.0 / ((1.0 - v) * self.density(v)))
    }

    /// `R(v) = 1 / (v q(v))`
    pub fn reversed_hazard_quantile(&self, v: f64) -> Result<f64> {
        open_unit_arg("reversed_hazard_quantile", v)?;
        Ok(1.0 / (v * self.density(v)))
    }

    /// `n` inverse-transform draws `Q(U)` from `rng`, unsorted.
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u = rng::open_unit(rng);
                self.form.quantile(u, 1.0 - u)
            })
            .collect()
    }

    fn derived(
        &self,
        name: String,
        params: BTreeMap<String, f64>,
        form: Arc<dyn QuantileForm>,
        closed: Option<ClosedForm>,
        support: Option<(f64, f64)>,
    ) -> Result<Self> {
        let model = QuantileModel {
            name,
            params,
            form,
            closed,
            support,
        };
        let tol = if self.is_davies_based() { 1e-3 } else { 1e-4 };
        model.check(tol)?;
        Ok(model)
    }

    fn is_davies_based(&self) -> bool {
        self.name.contains("davies")
    }
}

fn open_unit_arg(routine: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(routine, format!("v = {v} is outside (0, 1)")))
    }
}

/// Catalog model from parameters.
pub fn make_model(params: ModelParams) -> Result<QuantileModel> {
    QuantileModel::from_params(params)
}

/// `v^{1/θ}` and its complement, both to full relative precision.
#[inline]
pub(crate) fn root_pair(v: f64, vc: f64, theta: f64) -> (f64, f64) {
    let lv = if v > 0.5 { (-vc).ln_1p() } else { v.ln() };
    let t = lv / theta;
    (t.exp(), -t.exp_m1())
}

struct Prhm {
    base: Arc<dyn QuantileForm>,
    theta: f64,
}

impl QuantileForm for Prhm {
    fn quantile(&self, v: f64, vc: f64) -> f64 {
        let (w, wc) = root_pair(v, vc, self.theta);
        self.base.quantile(w, wc)
    }

    fn density(&self, v: f64, vc: f64) -> f64 {
        let (w, wc) = root_pair(v, vc, self.theta);
        self.base.density(w, wc) * (w / v) / self.theta
    }
}

/// Proportional reversed hazard model: `Q_Y(v) = Q_X(v^{1/θ})`.
pub fn prhm(base: &QuantileModel, theta: f64) -> Result<QuantileModel> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!("prhm: theta = {theta} must be positive")));
    }
    let closed = match base.closed {
        Some(ClosedForm::Catalog(ModelParams::Power { a, b })) => {
            Some(ClosedForm::PrhmPower { a, b, theta })
        }
        Some(ClosedForm::PrhmPower { a, b, theta: t0 }) => Some(ClosedForm::PrhmPower {
            a,
            b,
            theta: t0 * theta,
        }),
        _ => None,
    };
    let mut params = base.params.clone();
    params.insert("theta".into(), theta);
    base.derived(
        format!("prhm_{}", base.name),
        params,
        Arc::new(Prhm {
            base: base.form.clone(),
            theta,
        }),
        closed,
        base.support,
    )
}

struct Affine {
    base: Arc<dyn QuantileForm>,
    a: f64,
    b: f64,
}

impl QuantileForm for Affine {
    fn quantile(&self, v: f64, vc: f64) -> f64 {
        self.a * self.base.quantile(v, vc) + self.b
    }

    fn density(&self, v: f64, vc: f64) -> f64 {
        self.a * self.base.density(v, vc)
    }
}

/// `Q_Y = a Q_X + b` with `a > 0`, `b ≥ 0`.
pub fn affine(base: &QuantileModel, a: f64, b: f64) -> Result<QuantileModel> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("affine: scale a = {a} must be positive")));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("affine: shift b = {b} must be nonnegative")));
    }
    let mut params = base.params.clone();
    params.insert("scale".into(), a);
    params.insert("shift".into(), b);
    base.derived(
        format!("affine_{}", base.name),
        params,
        Arc::new(Affine {
            base: base.form.clone(),
            a,
            b,
        }),
        None,
        base.support.map(|(lo, hi)| (a * lo + b, a * hi + b)),
    )
}

struct Mapped {
    base: Arc<dyn QuantileForm>,
    psi: Transform,
}

impl QuantileForm for Mapped {
    fn quantile(&self, v: f64, vc: f64) -> f64 {
        self.psi.apply(self.base.quantile(v, vc))
    }

    fn density(&self, v: f64, vc: f64) -> f64 {
        self.base.density(v, vc) * self.psi.derivative(self.base.quantile(v, vc))
    }
}

/// `Q_Y = Ψ ∘ Q_X`, `q_Y = q_X · Ψ'(Q_X)`.
pub fn monotone_map(base: &QuantileModel, psi: &Transform) -> Result<QuantileModel> {
    for (v, vc) in check_grid() {
        let x = base.form.quantile(v, vc);
        let d = psi.derivative(x);
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::invalid_model(
                format!("{}({base})", psi.name()),
                format!("derivative of the transform is not positive at Q({v:e}) = {x}: {d}"),
            ));
        }
    }
    base.derived(
        format!("mapped_{}", base.name),
        base.params.clone(),
        Arc::new(Mapped {
            base: base.form.clone(),
            psi: psi.clone(),
        }),
        None,
        base.support
            .map(|(lo, hi)| (psi.apply(lo), psi.apply(hi)))
            .filter(|(lo, hi)| !lo.is_nan() && !hi.is_nan()),
    )
}

fn merged(m1: &QuantileModel, m2: &QuantileModel) -> BTreeMap<String, f64> {
    let mut params = BTreeMap::new();
    for (k, v) in &m1.params {
        params.insert(format!("1.{k}"), *v);
    }
    for (k, v) in &m2.params {
        params.insert(format!("2.{k}"), *v);
    }
    params
}

struct Sum(Arc<dyn QuantileForm>, Arc<dyn QuantileForm>);

impl QuantileForm for Sum {
    fn quantile(&self, v: f64, vc: f64) -> f64 {
        self.0.quantile(v, vc) + self.1.quantile(v, vc)
    }

    fn density(&self, v: f64, vc: f64) -> f64 {
        self.0.density(v, vc) + self.1.density(v, vc)
    }
}

/// `Q = Q₁ + Q₂`
pub fn qsum(m1: &QuantileModel, m2: &QuantileModel) -> Result<QuantileModel> {
    let davies = m1.is_davies_based() || m2.is_davies_based();
    let model = QuantileModel {
        name: format!("sum_{}_{}", m1.name, m2.name),
        params: merged(m1, m2),
        form: Arc::new(Sum(m1.form.clone(), m2.form.clone())),
        closed: None,
        support: match (m1.support, m2.support) {
            (Some(a), Some(b)) => Some((a.0 + b.0, a.1 + b.1)),
            _ => None,
        },
    };
    model.check(if davies { 1e-3 } else { 1e-4 })?;
    Ok(model)
}

struct Product(Arc<dyn QuantileForm>, Arc<dyn QuantileForm>);

impl QuantileForm for Product {
    fn quantile(&self, v: f64, vc: f64) -> f64 {
        self.0.quantile(v, vc) * self.1.quantile(v, vc)
    }

    fn density(&self, v: f64, vc: f64) -> f64 {
        self.1.quantile(v, vc) * self.0.density(v, vc) + self.0.quantile(v, vc) * self.1.density(v, vc)
    }
}

fn require_positive_q(m: &QuantileModel, what: &str) -> Result<()> {
    for (v, vc) in check_grid() {
        let x = m.form.quantile(v, vc);
        if !(x > 0.0) {
            return Err(Error::invalid_model(
                m.to_string(),
                format!("{what} needs Q > 0 on (0, 1), but Q({v:e}) = {x}"),
            ));
        }
    }
    Ok(())
}

/// `Q = Q₁ Q₂` for models with positive quantiles.
pub fn qproduct(m1: &QuantileModel, m2: &QuantileModel) -> Result<QuantileModel> {
    require_positive_q(m1, "product")?;
    require_positive_q(m2, "product")?;
    let davies = m1.is_davies_based() || m2.is_davies_based();
    let model = QuantileModel {
        name: format!("product_{}_{}", m1.name, m2.name),
        params: merged(m1, m2),
        form: Arc::new(Product(m1.form.clone(), m2.form.clone())),
        closed: None,
        support: match (m1.support, m2.support) {
            (Some(a), Some(b)) => Some((a.0 * b.0, a.1 * b.1)),
            _ => None,
        },
    };
    model.check(if davies { 1e-3 } else { 1e-4 })?;
    Ok(model)
}

struct Reciprocal(Arc<dyn QuantileForm>);

impl QuantileForm for Reciprocal {
    fn quantile(&self, v: f64, vc: f64) -> f64 {
        1.0 / self.0.quantile(vc, v)
    }

    fn density(&self, v: f64, vc: f64) -> f64 {
        let x = self.0.quantile(vc, v);
        self.0.density(vc, v) / (x * x)
    }
}

/// `Q_Y(v) = 1 / Q_X(1 - v)` for a model with positive quantiles.
pub fn reciprocal(base: &QuantileModel) -> Result<QuantileModel> {
    require_positive_q(base, "reciprocal")?;
    base.derived(
        format!("reciprocal_{}", base.name),
        base.params.clone(),
        Arc::new(Reciprocal(base.form.clone())),
        None,
        base.support
            .filter(|(lo, _)| *lo > 0.0)
            .map(|(lo, hi)| (1.0 / hi, 1.0 / lo)),
    )
}

/// `n` draws from `model`, reproducible from `seed`.
///
/// Uses stream 0 of the `(seed, Sample)` ChaCha8 keystream; see [`crate::rng`].
pub fn sample(model: &QuantileModel, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, Purpose::Sample, 0);
    let values = model.draw(&mut rng, n);
    Sample::new(
        values,
        SampleSource::Generator {
            model: model.to_string(),
            seed,
            n,
        },
    )
}
