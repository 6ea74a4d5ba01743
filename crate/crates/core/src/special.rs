//! Special functions needed by the closed-form entropies.
//!
//! Real arguments only. The zeta function uses the alternating (Dirichlet eta)
//! series with Cohen–Villegas–Zagier acceleration, which stays well behaved
//! as `s → 1⁺`. The Lerch transcendent switches from its defining series to
//! the Mellin-type integral once `z` is close enough to 1 that the series
//! would crawl. Tricomi's `U` is always evaluated from its Laplace-type
//! integral, so integer `B` needs no special handling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, QuadratureControl};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

/// Budget and tolerances for series evaluations.
///
/// A series is considered converged once its remainder bound drops below
/// `max(abs_tol, rel_tol * |partial sum|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub max_terms: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 1_000_000,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
        }
    }
}

impl SeriesControl {
    /// Tolerances at the limit of double precision.
    pub fn precise() -> Self {
        Self {
            max_terms: 1_000_000,
            abs_tol: 1e-15,
            rel_tol: 1e-14,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_terms >= 1 && self.abs_tol > 0.0 && self.rel_tol > 0.0 {
            Ok(())
        } else {
            Err(Error::domain(
                "series",
                format!("invalid control {self:?}: need max_terms >= 1 and positive tolerances"),
            ))
        }
    }

    fn tolerance(&self, magnitude: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * magnitude.abs())
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + (i + 1) as f64))
}

/// Gamma function for `x > 0` (Lanczos, g = 7).
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("gamma", format!("x = {x} must be positive and finite")));
    }
    if x < 0.5 {
        return Ok(gamma(x + 1.0)? / x);
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    let sum = lanczos_sum(xm);
    // Split the power so moderately large x does not overflow early.
    let half = t.powf(0.5 * (xm + 0.5));
    Ok((2.0 * std::f64::consts::PI).sqrt() * half * (half * (-t).exp()) * sum)
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("ln_gamma", format!("x = {x} must be positive and finite")));
    }
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln())
}

/// Euler–Mascheroni constant γ.
pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

/// Alternating sum `Σ_{k≥0} (-1)^k a(k)` by Cohen–Villegas–Zagier acceleration
/// with `n` terms.
fn cvz_alternating<A: Fn(usize) -> f64>(a: A, n: usize) -> f64 {
    let nf = n as f64;
    let d0 = (3.0 + 8f64.sqrt()).powf(nf);
    let d = 0.5 * (d0 + 1.0 / d0);
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    for k in 0..n {
        let kf = k as f64;
        c = b - c;
        sum += c * a(k);
        b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

/// Riemann zeta function for real `s > 1`.
pub fn riemann_zeta(s: f64, ctl: &SeriesControl) -> Result<f64> {
    ctl.validate()?;
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::domain("riemann_zeta", format!("s = {s} must exceed 1")));
    }
    // ζ(s) = η(s) / (1 - 2^{1-s}); the denominator amplifies the eta error.
    let denom = -((1.0 - s) * std::f64::consts::LN_2).exp_m1();
    let amplification = 1.0 / denom;
    // η(s) lies in (ln 2, 1) for s > 1, so ζ ≥ amplification · ln 2.
    let target = ctl.tolerance(amplification * std::f64::consts::LN_2);
    // CVZ remainder is at most 2 a(0) / (3 + √8)^n with a(0) = 1.
    let rate = (3.0 + 8f64.sqrt()).ln();
    let needed = ((2.0 * amplification / target).ln() / rate).ceil().max(1.0) as usize + 2;
    if needed > ctl.max_terms {
        return Err(Error::non_convergence(
            "riemann_zeta",
            format!("s = {s} needs {needed} accelerated terms, budget is {}", ctl.max_terms),
        ));
    }
    if needed > 300 || amplification * 8.0 * f64::EPSILON > target {
        return Err(Error::non_convergence(
            "riemann_zeta",
            format!("s = {s} is too close to 1 for the requested tolerance in double precision"),
        ));
    }
    let eta = cvz_alternating(|k| ((k + 1) as f64).powf(-s), needed);
    Ok(eta * amplification)
}

fn check_lerch_args(routine: &'static str, z: f64, s: f64) -> Result<()> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::domain(routine, format!("z = {z} must lie in [0, 1)")));
    }
    if !s.is_finite() {
        return Err(Error::domain(routine, format!("s = {s} must be finite")));
    }
    Ok(())
}

/// Above this `z` (and for `s > 0`) the Lerch series is replaced by its integral.
const LERCH_SERIES_LIMIT: f64 = 0.9;

/// Lerch transcendent `Φ(z, s, a) = Σ_{k≥0} z^k / (a + k)^s` for `0 ≤ z < 1`, `a > 0`.
pub fn lerch_phi(z: f64, s: f64, a: f64, ctl: &SeriesControl) -> Result<f64> {
    ctl.validate()?;
    check_lerch_args("lerch_phi", z, s)?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("lerch_phi", format!("a = {a} must be positive")));
    }
    if z == 0.0 {
        return Ok(a.powf(-s));
    }
    if s > 0.0 && z > LERCH_SERIES_LIMIT {
        return lerch_integral(z, s, a, ctl);
    }
    lerch_series(z, s, a, ctl)
}

fn lerch_series(z: f64, s: f64, a: f64, ctl: &SeriesControl) -> Result<f64> {
    let mut sum = 0.0;
    let mut zk = 1.0;
    for k in 0..ctl.max_terms {
        let base = a + k as f64;
        let term = zk * base.powf(-s);
        sum += term;
        // Remainder after this term: geometric bound with the running ratio.
        let ratio = z * ((base + 1.0) / base).powf(-s);
        if ratio < 1.0 {
            let next = term * ratio;
            let remainder = next / (1.0 - ratio);
            if remainder <= ctl.tolerance(sum) {
                return Ok(sum);
            }
        }
        zk *= z;
    }
    Err(Error::non_convergence(
        "lerch_phi",
        format!("series for z = {z}, s = {s}, a = {a} not converged in {} terms", ctl.max_terms),
    ))
}

/// `Φ(z,s,a) = Γ(s)^{-1} ∫₀^∞ t^{s-1} e^{-a t} / (1 - z e^{-t}) dt`, valid for `s > 0`.
fn lerch_integral(z: f64, s: f64, a: f64, ctl: &SeriesControl) -> Result<f64> {
    let ln_gamma_s = ln_gamma(s)?;
    let zc = 1.0 - z;
    let quad = QuadratureControl {
        abs_tol: ctl.abs_tol * 0.25,
        rel_tol: ctl.rel_tol.clamp(1e-13, 1e-11),
        ..QuadratureControl::default()
    };
    let r = integrate_half_line(
        |t| {
            if t == 0.0 {
                return 0.0;
            }
            let denom = zc + z * -(-t).exp_m1();
            ((s - 1.0) * t.ln() - a * t - ln_gamma_s).exp() / denom
        },
        1.0 / a,
        &quad,
    )
    .map_err(|e| relabel(e, "lerch_phi"))?;
    Ok(r.value)
}

fn relabel(e: Error, routine: &'static str) -> Error {
    match e {
        Error::Domain { detail, .. } => Error::Domain { routine, detail },
        Error::Divergence { detail, .. } => Error::Divergence { routine, detail },
        Error::NonConvergence { detail, .. } => Error::NonConvergence { routine, detail },
        other => other,
    }
}

/// Polylogarithm `Li_s(z) = Σ_{k≥1} z^k / k^s` for `0 ≤ z < 1`, `s > 0`.
pub fn polylog(s: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    ctl.validate()?;
    check_lerch_args("polylog", z, s)?;
    if !(s > 0.0) {
        return Err(Error::domain("polylog", format!("s = {s} must be positive")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(z * lerch_phi(z, s, 1.0, ctl).map_err(|e| relabel(e, "polylog"))?)
}

/// Tricomi confluent hypergeometric function `U(A, B, z)` for `A > 0`, `z > 0`,
/// from `Γ(A)^{-1} ∫₀^∞ e^{-zt} t^{A-1} (1+t)^{B-A-1} dt`.
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("tricomi_u", format!("A = {a} must be positive")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain("tricomi_u", format!("z = {z} must be positive")));
    }
    if !b.is_finite() {
        return Err(Error::domain("tricomi_u", format!("B = {b} must be finite")));
    }
    let ln_gamma_a = ln_gamma(a)?;
    let quad = QuadratureControl {
        abs_tol: 1e-300,
        rel_tol: 1e-12,
        ..QuadratureControl::default()
    };
    let r = integrate_half_line(
        |t| {
            if t == 0.0 {
                return 0.0;
            }
            ((a - 1.0) * t.ln() - z * t + (b - a - 1.0) * t.ln_1p() - ln_gamma_a).exp()
        },
        a.max(1.0) / z,
        &quad,
    )
    .map_err(|e| relabel(e, "tricomi_u"))?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn gamma_known_values() {
        assert!(close(gamma(1.0).unwrap(), 1.0, 1e-14));
        assert!(close(gamma(0.5).unwrap(), std::f64::consts::PI.sqrt(), 1e-14));
        assert!(close(gamma(5.0).unwrap(), 24.0, 1e-14));
        assert!(close(gamma(50.0).unwrap(), 6.082_818_640_342_675e62, 1e-12));
        assert!(close(gamma(0.1).unwrap(), 9.513_507_698_668_732, 1e-13));
    }

    #[test]
    fn gamma_recurrence() {
        for x in [0.3, 0.7, 1.5, 3.2] {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs, "x = {x}");
        }
    }

    #[test]
    fn gamma_domain() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
        assert!(ln_gamma(0.0).is_err());
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for x in [0.2, 1.0, 2.5, 10.0, 40.0] {
            assert!(close(ln_gamma(x).unwrap(), gamma(x).unwrap().ln(), 1e-13));
        }
    }

    #[test]
    fn zeta_values() {
        let ctl = SeriesControl::default();
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((riemann_zeta(2.0, &ctl).unwrap() - pi2_6).abs() < 1e-10);
        assert!((riemann_zeta(1.5, &ctl).unwrap() - 2.612_375_348_685_488).abs() < 1e-9);
        assert!((riemann_zeta(1.75, &ctl).unwrap() - 1.962_320_099_451_342).abs() < 1e-9);
        let z20 = riemann_zeta(20.0, &ctl).unwrap();
        assert!(z20 > 1.0 && z20 < 1.0 + 2e-6);
    }

    #[test]
    fn zeta_near_one() {
        // ζ(1 + δ) = 1/δ + γ + O(δ)
        let d = 1e-5;
        let z = riemann_zeta(1.0 + d, &SeriesControl::default()).unwrap();
        assert!((z - (1.0 / d + EULER_GAMMA)).abs() < 1e-4);
    }

    #[test]
    fn zeta_domain_and_budget() {
        assert!(matches!(
            riemann_zeta(1.0, &SeriesControl::default()),
            Err(Error::Domain { .. })
        ));
        let tight = SeriesControl {
            max_terms: 3,
            ..SeriesControl::default()
        };
        assert!(matches!(
            riemann_zeta(1.5, &tight),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn zeta_strictly_decreasing() {
        let ctl = SeriesControl::default();
        let vals: Vec<f64> = [1.1, 1.3, 1.7, 2.0, 3.0, 5.0, 9.0]
            .iter()
            .map(|&s| riemann_zeta(s, &ctl).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn polylog_values() {
        let ctl = SeriesControl::default();
        assert_eq!(polylog(2.0, 0.0, &ctl).unwrap(), 0.0);
        let ln2 = std::f64::consts::LN_2;
        let li2_half = std::f64::consts::PI.powi(2) / 12.0 - ln2 * ln2 / 2.0;
        assert!((polylog(2.0, 0.5, &ctl).unwrap() - li2_half).abs() < 1e-10);
        let near = polylog(1.5, 1.0 - 1e-8, &ctl).unwrap();
        assert!((near - 2.612_375_348_685_488).abs() < 1e-2);
        // both evaluation routes agree across the switch-over point
        let below = polylog(2.0, 0.9, &ctl).unwrap();
        let above = polylog(2.0, 0.900_000_000_1, &ctl).unwrap();
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn polylog_monotone_and_below_zeta() {
        let ctl = SeriesControl::default();
        for s in [1.25, 2.0, 3.5] {
            let zeta = riemann_zeta(s, &ctl).unwrap();
            let mut prev = -1.0;
            for i in 0..40 {
                let z = i as f64 / 40.0;
                let v = polylog(s, z, &ctl).unwrap();
                assert!(v > prev && v <= zeta);
                prev = v;
            }
        }
    }

    #[test]
    fn lerch_reductions() {
        let ctl = SeriesControl::default();
        assert!(close(lerch_phi(0.0, 1.5, 2.0, &ctl).unwrap(), 2f64.powf(-1.5), 1e-15));
        let li = polylog(2.0, 0.9, &ctl).unwrap();
        assert!(close(lerch_phi(0.9, 2.0, 1.0, &ctl).unwrap(), li / 0.9, 1e-10));
        for z in [0.1, 0.5, 0.95, 0.999] {
            let lhs = lerch_phi(z, 1.7, 1.0, &ctl).unwrap();
            let rhs = polylog(1.7, z, &ctl).unwrap() / z;
            assert!(close(lhs, rhs, 1e-10), "z = {z}");
        }
    }

    #[test]
    fn lerch_shift_identity() {
        // v Φ(v, s, 2) = (Li_s(v) - v) / v
        let ctl = SeriesControl::default();
        for v in [0.3, 0.5, 0.92, 0.99] {
            let lhs = v * lerch_phi(v, 1.5, 2.0, &ctl).unwrap();
            let rhs = (polylog(1.5, v, &ctl).unwrap() - v) / v;
            assert!((lhs - rhs).abs() < 1e-9, "v = {v}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn lerch_domain() {
        let ctl = SeriesControl::default();
        assert!(lerch_phi(1.0, 2.0, 1.0, &ctl).is_err());
        assert!(lerch_phi(-0.1, 2.0, 1.0, &ctl).is_err());
        assert!(lerch_phi(0.5, 2.0, 0.0, &ctl).is_err());
        assert!(polylog(0.0, 0.5, &ctl).is_err());
    }

    #[test]
    fn tricomi_reductions() {
        // U(1, 2, z) = 1/z
        assert!(close(tricomi_u(1.0, 2.0, 5.0).unwrap(), 0.2, 1e-10));
        // U(1, 1, 1) = e E₁(1)
        assert!(close(tricomi_u(1.0, 1.0, 1.0).unwrap(), 0.596_347_362_323_194_1, 1e-9));
        // U(a, a + 1, z) = z^{-a}
        assert!(close(tricomi_u(2.5, 3.5, 0.7).unwrap(), 0.7f64.powf(-2.5), 1e-9));
    }

    #[test]
    fn tricomi_domain() {
        assert!(tricomi_u(0.0, 1.0, 1.0).is_err());
        assert!(tricomi_u(1.0, 1.0, 0.0).is_err());
    }
}
