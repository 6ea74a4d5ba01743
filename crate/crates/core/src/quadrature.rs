//! Adaptive Gauss–Kronrod quadrature.
//!
//! [`integrate`] is a global adaptive 10/21-point Gauss–Kronrod scheme in the
//! QUADPACK mould. [`integrate_unit`] specialises it to integrands on (0, 1)
//! that may be singular at both ends: the interval is split at 1/2, the upper
//! half is integrated in the complement variable `w = 1 - p` so that points
//! close to 1 keep full relative precision, and the two clipped end pieces
//! `[0, ε]` are replaced by a power-law tail fitted at the clip point.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_290_880,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Breakpoints used to seed the subdivision of each half of (0, 1).
const UNIT_SEEDS: [f64; 3] = [1e-6, 1e-3, 0.5];

/// Settings for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Distance from each endpoint of (0, 1) below which the integrand is
    /// replaced by a fitted power-law tail.
    pub endpoint_clip: f64,
}

impl Default for QuadratureControl {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_subdivisions: 4000,
            endpoint_clip: 1e-12,
        }
    }
}

impl QuadratureControl {
    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_subdivisions > 0
            && self.endpoint_clip > 0.0
            && self.endpoint_clip < 1e-3;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(
                "quadrature",
                format!("invalid control {self:?}: tolerances and subdivisions must be positive, 0 < endpoint_clip < 1e-3"),
            ))
        }
    }
}

/// Value of a definite integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

impl std::ops::Add for Integral {
    type Output = Integral;

    fn add(self, rhs: Integral) -> Integral {
        Integral {
            value: self.value + rhs.value,
            abs_err: self.abs_err + rhs.abs_err,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 21-point Gauss–Kronrod panel on `[a, b]`. Returns `(value, error)`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_k = f_center * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let abs_half = half.abs();
    let err = rescale_error(
        (res_k - res_g) * half,
        res_abs * abs_half,
        res_asc * abs_half,
    );
    (res_k * half, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let (value, err) = gauss_kronrod(f, a, b);
    if !value.is_finite() || !err.is_finite() {
        return Err(Error::divergence(
            "quadrature",
            format!("integrand is not finite on [{a:e}, {b:e}]"),
        ));
    }
    Ok(Panel { a, b, value, err })
}

/// Global adaptive integration of `f` over `[points[0], points[last]]`.
///
/// The interior entries of `points` seed the initial subdivision. The panel
/// with the largest error estimate is bisected until the summed error is
/// below `max(abs_tol, rel_tol * |value|)`. Panels too narrow to split in
/// floating point are retired; if only such panels remain the current
/// estimate is returned with its (honest) error.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Integral> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain(
            "quadrature",
            "breakpoints must be strictly increasing and at least two",
        ));
    }

    let mut heap = BinaryHeap::new();
    let mut retired_value = 0.0;
    let mut retired_err = 0.0;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let p = panel(&f, w[0], w[1])?;
        total += p.value;
        total_err += p.err;
        heap.push(p);
    }
    let mut panels = points.len() - 1;

    loop {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b)
            || (worst.b - worst.a) <= 64.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
        {
            retired_value += worst.value;
            retired_err += worst.err;
            continue;
        }
        if panels >= max_subdivisions {
            return Err(Error::non_convergence(
                "quadrature",
                format!(
                    "subdivision budget {max_subdivisions} exhausted with error {total_err:.3e} on value {total:.12e}"
                ),
            ));
        }
        let left = panel(&f, worst.a, mid)?;
        let right = panel(&f, mid, worst.b)?;
        panels += 1;
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed drift from the incremental updates.
    let mut value = retired_value;
    let mut err = retired_err;
    for p in heap.iter() {
        value += p.value;
        err += p.err;
    }
    Ok(Integral {
        value,
        abs_err: err,
        evaluations: 21 * (2 * panels - points.len() + 1),
    })
}

/// Integral of `g` over `[0, eps]` assuming `g(x) ≈ C x^c` near zero.
///
/// The exponent is read off from `g(eps)` and `g(2 eps)`; a second fit from
/// `g(2 eps)` and `g(4 eps)` supplies the error estimate. Exponents at or
/// below -1 mean the integral diverges at this endpoint.
pub fn power_law_tail<G: Fn(f64) -> f64>(g: G, eps: f64) -> Result<Integral> {
    let f1 = g(eps);
    let f2 = g(2.0 * eps);
    let f4 = g(4.0 * eps);
    if !f1.is_finite() || !f2.is_finite() || !f4.is_finite() {
        return Err(Error::divergence(
            "quadrature",
            format!("integrand not finite near endpoint (offset {eps:e})"),
        ));
    }
    let evaluations = 3;
    if f1 == 0.0 {
        return Ok(Integral {
            value: 0.0,
            abs_err: f2.abs() * eps,
            evaluations,
        });
    }
    let same_sign = |a: f64, b: f64| a != 0.0 && b != 0.0 && a.signum() == b.signum();
    if !same_sign(f1, f2) {
        return Ok(Integral {
            value: f1 * eps,
            abs_err: 2.0 * (f1.abs() + f2.abs()) * eps,
            evaluations,
        });
    }
    let c1 = (f2 / f1).ln() / std::f64::consts::LN_2;
    if c1 <= -1.0 + 1e-9 {
        return Err(Error::divergence(
            "quadrature",
            format!("integrand grows like x^{c1:.6} at an endpoint; not integrable"),
        ));
    }
    let value = f1 * eps / (c1 + 1.0);
    let abs_err = if same_sign(f2, f4) {
        let c2 = (f4 / f2).ln() / std::f64::consts::LN_2;
        let alt = f1 * eps / (c2 + 1.0).max(1e-300);
        (value - alt).abs() + 4.0 * f64::EPSILON * value.abs()
    } else {
        value.abs()
    };
    Ok(Integral {
        value,
        abs_err,
        evaluations,
    })
}

/// `-ln p` given both `p` and `pc = 1 - p`, accurate near either end.
#[inline]
pub fn neg_ln(p: f64, pc: f64) -> f64 {
    if p > 0.5 {
        -(-pc).ln_1p()
    } else {
        -p.ln()
    }
}

/// `∫₀¹ f(p, 1-p) dp` for integrands that may be singular at 0 and/or 1.
///
/// `f` receives the abscissa and its complement; the complement is exact
/// (not recomputed as `1 - p`) on the upper half.
pub fn integrate_unit<F: Fn(f64, f64) -> f64>(f: F, ctl: &QuadratureControl) -> Result<Integral> {
    ctl.validate()?;
    let eps = ctl.endpoint_clip;
    let mut seeds = vec![eps];
    seeds.extend(UNIT_SEEDS.iter().copied().filter(|&s| s > eps));

    let lower = |p: f64| f(p, 1.0 - p);
    let upper = |w: f64| f(1.0 - w, w);

    let lo_tail = endpoint_tail(lower, eps, ctl)?;
    let hi_tail = endpoint_tail(upper, eps, ctl)?;
    let tol = 0.5 * ctl.abs_tol;
    let lo = integrate(lower, &seeds, tol, ctl.rel_tol, ctl.max_subdivisions)?;
    let hi = integrate(upper, &seeds, tol, ctl.rel_tol, ctl.max_subdivisions)?;
    Ok(lo + hi + lo_tail + hi_tail)
}

/// Largest `s` used by [`endpoint_tail`]; `e^{-700}` is still a normal float.
const TAIL_DEPTH: f64 = 700.0;

/// `∫₀^eps g(x) dx` via `x = e^{-s}`, which turns power and logarithmic
/// endpoint behavior into exponential decay in `s`. Past the depth where `g`
/// stops being finite (or past [`TAIL_DEPTH`]) the power-law fit covers the
/// remainder; if the substituted integral fails outright the fit covers all of it.
fn endpoint_tail<G: Fn(f64) -> f64>(g: G, eps: f64, ctl: &QuadratureControl) -> Result<Integral> {
    let fit = power_law_tail(&g, eps)?;
    let s0 = -eps.ln();
    let h = |s: f64| {
        let x = (-s).exp();
        let y = g(x);
        if y == 0.0 {
            0.0
        } else {
            y * x
        }
    };
    let depth = finite_depth(&h, s0);
    if depth <= s0 + 1.0 {
        return Ok(fit);
    }
    let mut points: Vec<f64> = [s0, s0 + 4.0, s0 + 16.0, s0 + 64.0, s0 + 256.0]
        .into_iter()
        .filter(|&s| s < depth)
        .collect();
    points.push(depth);
    let body = match integrate(h, &points, 0.25 * ctl.abs_tol, ctl.rel_tol, ctl.max_subdivisions) {
        Ok(r) => r,
        Err(_) => return Ok(fit),
    };
    let rest = power_law_tail(&g, (-depth).exp()).unwrap_or(Integral {
        value: 0.0,
        abs_err: h(depth).abs(),
        evaluations: 3,
    });
    Ok(Integral {
        value: body.value + rest.value,
        abs_err: body.abs_err + rest.abs_err.max(f64::EPSILON * rest.value.abs()),
        evaluations: body.evaluations + rest.evaluations + fit.evaluations,
    })
}

/// Largest `s <= TAIL_DEPTH` (less a unit margin) at which `h` is finite,
/// assuming finiteness is lost at most once along `[s0, TAIL_DEPTH]`.
fn finite_depth<H: Fn(f64) -> f64>(h: &H, s0: f64) -> f64 {
    if h(TAIL_DEPTH).is_finite() {
        return TAIL_DEPTH;
    }
    let (mut lo, mut hi) = (s0, TAIL_DEPTH);
    if !h(lo).is_finite() {
        return s0;
    }
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if h(mid).is_finite() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo - 1.0).max(s0)
}

/// `∫₀^∞ f(t) dt` through the map `t = scale · w / (1 - w)`, `w ∈ (0, 1)`.
///
/// `scale` should be the length scale on which `f` varies; the seed point
/// `w = 1/2` lands on `t = scale`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    f: F,
    scale: f64,
    ctl: &QuadratureControl,
) -> Result<Integral> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain("quadrature", "half-line scale must be positive"));
    }
    integrate_unit(
        |w, wc| {
            let t = scale * w / wc;
            let jac = scale / (wc * wc);
            let v = f(t);
            // exp-type decay underflows to zero before the Jacobian overflows.
            if v == 0.0 {
                0.0
            } else {
                v * jac
            }
        },
        ctl,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        // 21-point Kronrod integrates degree 31 exactly.
        let (v, _) = gauss_kronrod(|x| x.powi(7) - 3.0 * x * x + 1.0, 0.0, 2.0);
        assert!((v - (32.0 - 8.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_interior_kink() {
        let r = integrate(|x: f64| (x - 0.3).abs(), &[0.0, 1.0], 1e-12, 1e-12, 200).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-11);
    }

    #[test]
    fn unit_interval_with_endpoint_singularities() {
        // ∫ x^{-1/2} (1-x)^{-3/4} = B(1/2, 1/4)
        let beta = 5.244_115_108_584_24;
        let r = integrate_unit(|p, pc| p.powf(-0.5) * pc.powf(-0.75), &QuadratureControl::default())
            .unwrap();
        assert!((r.value - beta).abs() < 1e-9, "{} vs {}", r.value, beta);
    }

    #[test]
    fn log_singularity() {
        // ∫₀¹ ln(-ln p) dp = -γ
        let r = integrate_unit(|p, pc| neg_ln(p, pc).ln(), &QuadratureControl::default()).unwrap();
        assert!((r.value + 0.577_215_664_901_532_9).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn mixed_tail_exponents_with_overflow() {
        // x^{-1/2} + x^{-7/8} / 8; the second term overflows for x below ~1e-308^{8/7}.
        let r = integrate_unit(
            |p, _| {
                let t = p.powf(-0.875);
                p.powf(-0.5) + if t.is_finite() { t / 8.0 } else { f64::INFINITY }
            },
            &QuadratureControl::default(),
        )
        .unwrap();
        assert!((r.value - 3.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn divergent_endpoint_is_reported() {
        let err = integrate_unit(|_, pc| 1.0 / pc, &QuadratureControl::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "{err}");
    }

    #[test]
    fn half_line_exponential() {
        let r = integrate_half_line(|t| (-2.0 * t).exp(), 0.5, &QuadratureControl::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_control() {
        let ctl = QuadratureControl {
            endpoint_clip: 0.01,
            ..Default::default()
        };
        assert!(integrate_unit(|_, _| 1.0, &ctl).is_err());
    }
}
