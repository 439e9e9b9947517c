//! Sine and cosine integrals plus thin wrappers over `statrs` special functions.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    statrs::function::gamma::gamma_ur(a, x)
}

/// `(Si(x), Ci(x))` for `x > 0`: power series below 2, continued fraction above.
pub fn sici(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "sici needs x > 0");
    if x <= 2.0 {
        let mut si = 0.0;
        let mut ci = 0.0;
        // fact_term = x^k / k!
        let mut fact_term = 1.0;
        for k in 1..60 {
            fact_term *= x / k as f64;
            let kk = k as f64;
            if k % 2 == 1 {
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                si += sign * fact_term / kk;
            } else {
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                ci += sign * fact_term / kk;
            }
            if fact_term < 1e-20 {
                break;
            }
        }
        (si, EULER_GAMMA + x.ln() + ci)
    } else {
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..500 {
            let a = -((i - 1) * (i - 1)) as f64;
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(x.cos(), -x.sin());
        (FRAC_PI_2 + h.im, -h.re)
    }
}

/// `1 - sin(s)/s`, free of cancellation for small `s`.
pub fn one_minus_sinc(s: f64) -> f64 {
    let s = s.abs();
    if s < 0.05 {
        let s2 = s * s;
        s2 / 6.0 * (1.0 - s2 / 20.0 * (1.0 - s2 / 42.0 * (1.0 - s2 / 72.0)))
    } else {
        1.0 - s.sin() / s
    }
}

/// `1 - cos(s)` via the half-angle form.
pub fn one_minus_cos(s: f64) -> f64 {
    let h = (0.5 * s).sin();
    2.0 * h * h
}
