#![allow(dead_code)]

use std::f64::consts::PI;

use qfgcpe::{make_model, ModelParams, QuantileModel};

/// Tanh-sinh rule on (0, 1). `f` receives `(p, 1 - p)` with both parts
/// accurate near the endpoints.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(f: F) -> f64 {
    let t_max = 4.6;
    let eval = |t: f64| {
        let u = PI * t.sinh();
        let p = 1.0 / (1.0 + (-u).exp());
        let pc = 1.0 / (1.0 + u.exp());
        if p <= 0.0 || pc <= 0.0 {
            return 0.0;
        }
        let w = PI * t.cosh() * p * pc;
        let y = f(p, pc) * w;
        if y.is_finite() {
            y
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h;
    for _ in 0..12 {
        h /= 2.0;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= 1e-14 * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Lanczos Γ for positive arguments.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

fn neg_ln(p: f64, pc: f64) -> f64 {
    if p < 0.5 {
        -p.ln()
    } else {
        -(-pc).ln_1p()
    }
}

/// `(1/Γ(η+1)) ∫ p (−ln p)^η q(p) dp` by tanh-sinh.
pub fn static_oracle(m: &QuantileModel, eta: f64) -> f64 {
    tanh_sinh(|p, pc| p * neg_ln(p, pc).powf(eta) * m.density_c(p, pc)) / gamma(eta + 1.0)
}

/// Dynamic value via `p = v w`.
pub fn dynamic_oracle(m: &QuantileModel, eta: f64, v: f64) -> f64 {
    tanh_sinh(|w, wc| {
        let p = v * w;
        w * neg_ln(w, wc).powf(eta) * v * m.density_c(p, 1.0 - p)
    }) / gamma(eta + 1.0)
}

pub fn model(p: ModelParams) -> QuantileModel {
    make_model(p).unwrap()
}

pub fn catalog() -> Vec<QuantileModel> {
    use ModelParams::*;
    [
        Uniform { b: 1.0 },
        Exponential { lambda: 1.0 },
        Power { a: 1.0, b: 2.0 },
        HalfLogistic { k: 1.0 },
        Frechet { a: 8.0, b: 1.0 },
        Davies { k: 1.0, a: -1.0, b: 0.0 },
        Govindarajalu {
            alpha: 1.0,
            beta: 2.0,
            gamma: 2.0,
        },
    ]
    .into_iter()
    .map(model)
    .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
