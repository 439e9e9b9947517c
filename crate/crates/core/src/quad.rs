//! Adaptive Gauss-Kronrod quadrature and helpers for oscillatory integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

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

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const MAX_INTERVALS: usize = 4000;

/// Value of an integral together with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// One application of the 21-point Kronrod rule with its embedded
/// 10-point Gauss rule; the error estimate follows QUADPACK.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    gk21_abs(f, a, b).0
}

/// As [`gk21`], also returning `int |f|` for the roundoff floor.
fn gk21_abs<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (Estimate, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    (Estimate { value, error }, res_abs)
}

struct Interval {
    a: f64,
    b: f64,
    est: Estimate,
    abs: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive bisection on `[a, b]` until the summed error estimate
/// drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (first, first_abs) = gk21_abs(f, a, b);
    let mut total = first;
    let mut total_abs = first_abs;
    let mut heap = BinaryHeap::new();
    heap.push(Interval {
        a,
        b,
        est: first,
        abs: first_abs,
    });
    // below 100 eps * int |f| the error estimate is roundoff, not truncation
    let target = |value: f64, abs: f64| abs_tol.max(rel_tol * value.abs()).max(100.0 * f64::EPSILON * abs);
    loop {
        if total.value.is_finite() && total.error <= target(total.value, total_abs) {
            break;
        }
        if heap.len() >= MAX_INTERVALS || !total.value.is_finite() {
            return Err(Error::Quadrature {
                estimate: total.error,
                tolerance: target(total.value, total_abs),
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval can no longer be split in floating point
            return Err(Error::Quadrature {
                estimate: total.error,
                tolerance: target(total.value, total_abs),
            });
        }
        let (left, left_abs) = gk21_abs(f, worst.a, mid);
        let (right, right_abs) = gk21_abs(f, mid, worst.b);
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        total_abs += left_abs + right_abs - worst.abs;
        heap.push(Interval {
            a: worst.a,
            b: mid,
            est: left,
            abs: left_abs,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            est: right,
            abs: right_abs,
        });
    }
    // re-sum to shed the drift of the running updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), iv| (v + iv.est.value, e + iv.est.error));
    Ok(Estimate { value, error })
}

/// Integrates over consecutive panels `[p[i], p[i+1]]`, splitting the
/// tolerance in proportion to panel length.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Result<Estimate> {
    let span = (breaks[breaks.len() - 1] - breaks[0]).abs();
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for w in breaks.windows(2) {
        let share = if span > 0.0 { (w[1] - w[0]).abs() / span } else { 1.0 };
        let e = integrate(f, w[0], w[1], abs_tol * share, rel_tol)?;
        total.value += e.value;
        total.error += e.error;
    }
    Ok(total)
}

/// `int_start^inf f(x) dx` for an integrand whose sign alternates on the
/// consecutive half-periods `[start + k h, start + (k+1) h]` with smoothly
/// decaying magnitude. Partial sums are accelerated by repeated averaging.
pub fn alternating_tail<F: Fn(f64) -> f64>(f: &F, start: f64, half_period: f64, panels: usize, abs_tol: f64) -> Result<Estimate> {
    let mut partial = Vec::with_capacity(panels);
    let mut acc = 0.0;
    let mut err = 0.0;
    for k in 0..panels {
        let a = start + k as f64 * half_period;
        let e = integrate(f, a, a + half_period, abs_tol / panels as f64, 1e-13)?;
        acc += e.value;
        err += e.error;
        partial.push(acc);
    }
    let keep = panels / 2;
    let mut row = partial;
    while row.len() > keep.max(1) {
        row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    let n = row.len();
    let spread = if n >= 2 { (row[n - 1] - row[n - 2]).abs() } else { 0.0 };
    Ok(Estimate {
        value: row[n - 1],
        error: err + spread,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > x_tol && iter < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
