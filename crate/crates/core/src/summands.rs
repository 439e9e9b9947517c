//! Heavy-tailed symmetric summand families.
//!
//! Every family exposes its density, tail `P(|X| > x)`, distribution
//! function, a sampler and `1 - phi(t)` evaluated without subtractive
//! cancellation. `1 - phi(t)` has two independent routes: a closed form or
//! series where one exists, and a generic split quadrature
//! ([`Family::one_minus_cf_quadrature`]) that works for every family.

use std::f64::consts::{E, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::rng;
use crate::special::{gamma, gamma_q, one_minus_cos, one_minus_sinc, sici};

/// Density `A / (2|x|^3)` for `|x| >= x0`, flat at the same height inside.
/// Normalization forces `x0 = sqrt(3A/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicTail {
    pub amplitude: f64,
    pub x0: f64,
}

/// Density `norm |x|^{-alpha-1} (log|x|)^beta` for `|x| >= e`, zero inside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoLog {
    pub alpha: f64,
    pub beta: f64,
    pub x0: f64,
    pub norm: f64,
}

/// Density `norm |x|^{-alpha-1}` for `|x| >= x0`, zero inside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlainPareto {
    pub alpha: f64,
    pub x0: f64,
    pub norm: f64,
}

impl CubicTail {
    pub fn new(amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("A = {amplitude} must be positive")));
        }
        Ok(Self {
            amplitude,
            x0: (1.5 * amplitude).sqrt(),
        })
    }

    fn center_height(&self) -> f64 {
        self.amplitude / (2.0 * self.x0.powi(3))
    }

    /// `Sigma(x) = int_{|y| <= x} y^2 f(y) dy`.
    pub fn truncated_variance(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("truncated variance needs x > 0, got {x}")));
        }
        let a = self.amplitude;
        Ok(if x <= self.x0 {
            2.0 * self.center_height() * x.powi(3) / 3.0
        } else {
            a / 3.0 + a * (x / self.x0).ln()
        })
    }

    /// Closed form: the flat center contributes `(A/x0^2)(1 - sin s/s)` and the
    /// tail `A t^2 G(s)` with `G(s) = int_s^inf (1 - cos u)/u^3 du`, `s = |t| x0`.
    fn one_minus_cf(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            return 0.0;
        }
        let a = self.amplitude;
        let s = t * self.x0;
        let (_, ci) = sici(s);
        let g = one_minus_cos(s) / (2.0 * s * s) + s.sin() / (2.0 * s) - 0.5 * ci;
        a / (self.x0 * self.x0) * one_minus_sinc(s) + a * t * t * g
    }
}

impl ParetoLog {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 2)")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta = {beta} must be >= 0")));
        }
        // int_e^inf x^{-alpha-1} (log x)^beta dx = alpha^{-beta-1} Gamma(beta+1, alpha)
        let half_mass = alpha.powf(-beta - 1.0) * gamma(beta + 1.0) * gamma_q(beta + 1.0, alpha);
        Ok(Self {
            alpha,
            beta,
            x0: E,
            norm: 0.5 / half_mass,
        })
    }

    /// Leading constant `c` of `P(|X| > x) ~ c x^{-alpha} (log x)^beta`.
    pub fn tail_constant(&self) -> f64 {
        2.0 * self.norm / self.alpha
    }
}

impl PlainPareto {
    pub fn new(alpha: f64, x0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 2)")));
        }
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(Error::InvalidParameter(format!("x0 = {x0} must be positive")));
        }
        Ok(Self {
            alpha,
            x0,
            norm: alpha * x0.powf(alpha) / 2.0,
        })
    }

    /// `int_0^inf (1 - cos y) y^{-alpha-1} dy`.
    fn full_integral(&self) -> f64 {
        let a = self.alpha;
        if (a - 1.0).abs() < 1e-12 {
            PI / 2.0
        } else {
            gamma(1.0 - a) * (PI * a / 2.0).cos() / a
        }
    }

    /// `int_0^s (1 - cos y) y^{-alpha-1} dy` as a power series, `s <= 2`.
    fn head_series(&self, s: f64) -> f64 {
        let a = self.alpha;
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 1..40 {
            let two_k = 2.0 * k as f64;
            fact *= (two_k - 1.0) * two_k;
            let term = s.powf(two_k - a) / (fact * (two_k - a));
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Family {
    Cubic(CubicTail),
    ParetoLog(ParetoLog),
    Pareto(PlainPareto),
}

impl Family {
    pub fn cubic(amplitude: f64) -> Result<Self> {
        CubicTail::new(amplitude).map(Family::Cubic)
    }

    pub fn pareto_log(alpha: f64, beta: f64) -> Result<Self> {
        ParetoLog::new(alpha, beta).map(Family::ParetoLog)
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        PlainPareto::new(alpha, 1.0).map(Family::Pareto)
    }

    /// Index of the stable law the normalized sums are attracted to.
    pub fn tail_index(&self) -> f64 {
        match self {
            Family::Cubic(_) => 2.0,
            Family::ParetoLog(p) => p.alpha,
            Family::Pareto(p) => p.alpha,
        }
    }

    /// Point from which the tail formula is in force.
    pub fn tail_onset(&self) -> f64 {
        match self {
            Family::Cubic(c) => c.x0,
            Family::ParetoLog(p) => p.x0,
            Family::Pareto(p) => p.x0,
        }
    }

    /// Density on the tail region `x >= x0`, valid for `x > 0`.
    fn tail_density(&self, x: f64) -> f64 {
        match self {
            Family::Cubic(c) => c.amplitude / (2.0 * x * x * x),
            Family::ParetoLog(p) => p.norm * x.powf(-p.alpha - 1.0) * x.ln().powf(p.beta),
            Family::Pareto(p) => p.norm * x.powf(-p.alpha - 1.0),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax >= self.tail_onset() {
            return self.tail_density(ax);
        }
        match self {
            Family::Cubic(c) => c.center_height(),
            _ => 0.0,
        }
    }

    fn tail_unchecked(&self, x: f64) -> f64 {
        match self {
            Family::Cubic(c) => c.amplitude / (2.0 * x * x),
            Family::ParetoLog(p) => gamma_q(p.beta + 1.0, p.alpha * x.ln()) / gamma_q(p.beta + 1.0, p.alpha),
            Family::Pareto(p) => (x / p.x0).powf(-p.alpha),
        }
    }

    /// `P(|X| > x)` for `x >= x0`.
    pub fn tail(&self, x: f64) -> Result<f64> {
        if !(x >= self.tail_onset()) {
            return Err(Error::Domain(format!(
                "tail formula holds for x >= {}, got {x}",
                self.tail_onset()
            )));
        }
        Ok(self.tail_unchecked(x))
    }

    /// `P(|X| > x)` for any `x >= 0`.
    pub fn abs_survival(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax >= self.tail_onset() {
            return self.tail_unchecked(ax);
        }
        match self {
            Family::Cubic(c) => 1.0 - 2.0 * c.center_height() * ax,
            _ => 1.0,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let half_tail = 0.5 * self.abs_survival(x);
        if x >= 0.0 {
            1.0 - half_tail
        } else {
            half_tail
        }
    }

    /// `1 - phi(t)`, using the fastest accurate route for the family.
    pub fn one_minus_cf(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        match self {
            Family::Cubic(c) if t.abs() * c.x0 <= 1e6 => Ok(c.one_minus_cf(t)),
            Family::Pareto(p) if (p.alpha - 1.0).abs() < 1e-12 && t.abs() * p.x0 > 2.0 => {
                // int_s^inf (1 - cos v) / v^2 dv = (1 - cos s)/s + pi/2 - Si(s)
                let s = t.abs() * p.x0;
                let (si, _) = sici(s);
                Ok(one_minus_cos(s) + s * (FRAC_PI_2 - si))
            }
            Family::Pareto(p) if t.abs() * p.x0 <= 2.0 => {
                let s = t.abs() * p.x0;
                Ok(p.alpha * s.powf(p.alpha) * (p.full_integral() - p.head_series(s)))
            }
            _ => self.one_minus_cf_quadrature(t),
        }
    }

    /// `2 int_0^inf 2 sin^2(tx/2) f(x) dx` by quadrature, split at the
    /// oscillation scale `pi/|t|`. Beyond a few periods the remainder is
    /// written as the tail mass minus an alternating cosine integral.
    pub fn one_minus_cf_quadrature(&self, t: f64) -> Result<f64> {
        let s = t.abs();
        if s == 0.0 {
            return Ok(0.0);
        }
        let half_period = PI / s;
        let onset = self.tail_onset();
        if !(self.tail_density(half_period.max(onset)) * half_period).is_normal() {
            return Err(Error::Domain(format!("1 - phi({t:e}) underflows in the split quadrature")));
        }
        let rel = 1e-13;
        let mut total = 0.0;

        if let Family::Cubic(c) = self {
            let h = c.center_height();
            let centre = move |x: f64| 2.0 * h * one_minus_cos(s * x);
            total += quad::integrate_panels(&centre, &half_period_breaks(0.0, onset, half_period), 0.0, rel)?.value;
        }

        let tail_start = (((onset / half_period) - 0.5).ceil().max(0.0) + 0.5 + 4.0) * half_period;
        let body = |x: f64| 2.0 * one_minus_cos(s * x) * self.tail_density(x);

        let mut breaks = vec![onset];
        let mut x = onset;
        while 2.0 * x < half_period {
            x *= 2.0;
            breaks.push(x);
        }
        let mut rest = half_period_breaks(x, tail_start, half_period);
        rest.remove(0);
        breaks.extend(rest);
        total += quad::integrate_panels(&body, &breaks, 0.0, rel)?.value;

        let mass = self.tail_unchecked(tail_start);
        let cosine = |x: f64| (s * x).cos() * self.tail_density(x);
        let osc = quad::alternating_tail(&cosine, tail_start, half_period, 40, 1e-15 * mass)?;
        total += mass - 2.0 * osc.value;
        Ok(total)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = rng::open_unit(rng);
        match self {
            Family::Cubic(c) => {
                let a = c.amplitude;
                if u < 1.0 / 6.0 {
                    -(a / (4.0 * u)).sqrt()
                } else if u > 5.0 / 6.0 {
                    (a / (4.0 * (1.0 - u))).sqrt()
                } else {
                    (u - 0.5) / c.center_height()
                }
            }
            Family::Pareto(p) => {
                if u < 0.5 {
                    -p.x0 * (2.0 * u).powf(-1.0 / p.alpha)
                } else {
                    p.x0 * (2.0 * (1.0 - u)).powf(-1.0 / p.alpha)
                }
            }
            Family::ParetoLog(p) => {
                // alpha log|X| is Gamma(beta+1) conditioned on exceeding alpha
                let g = Gamma::new(p.beta + 1.0, 1.0).expect("valid gamma shape");
                let w = loop {
                    let w: f64 = g.sample(rng);
                    if w >= p.alpha {
                        break w;
                    }
                };
                let mag = (w / p.alpha).exp();
                if u < 0.5 {
                    -mag
                } else {
                    mag
                }
            }
        }
    }

    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::InvalidParameter("count must be at least 1".into()));
        }
        let mut r = rng::stream(seed, 0);
        Ok((0..count).map(|_| self.draw(&mut r)).collect())
    }
}

fn half_period_breaks(a: f64, b: f64, half_period: f64) -> Vec<f64> {
    let mut breaks = vec![a];
    let mut x = a;
    while x + half_period < b {
        x += half_period;
        breaks.push(x);
    }
    breaks.push(b);
    breaks
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cubic(c) => write!(f, "cubic:A={}", c.amplitude),
            Family::ParetoLog(p) => write!(f, "paretolog:alpha={},beta={}", p.alpha, p.beta),
            Family::Pareto(p) if p.x0 == 1.0 => write!(f, "pareto:alpha={}", p.alpha),
            Family::Pareto(p) => write!(f, "pareto:alpha={},x0={}", p.alpha, p.x0),
        }
    }
}

pub(crate) fn parse_params(body: &str) -> Result<Vec<(String, f64)>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{kv}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("'{v}' is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

pub(crate) fn take(params: &[(String, f64)], key: &str) -> Option<f64> {
    params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
}

pub(crate) fn reject_unknown(params: &[(String, f64)], allowed: &[&str]) -> Result<()> {
    match params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(Error::Parse(format!("unknown parameter '{k}'"))),
        None => Ok(()),
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        let params = parse_params(body)?;
        let need = |key: &str| take(&params, key).ok_or_else(|| Error::Parse(format!("'{s}' is missing {key}=")));
        match name.trim() {
            "cubic" => {
                reject_unknown(&params, &["A"])?;
                Family::cubic(need("A")?)
            }
            "paretolog" => {
                reject_unknown(&params, &["alpha", "beta"])?;
                Family::pareto_log(need("alpha")?, need("beta")?)
            }
            "pareto" => {
                reject_unknown(&params, &["alpha", "x0"])?;
                PlainPareto::new(need("alpha")?, take(&params, "x0").unwrap_or(1.0)).map(Family::Pareto)
            }
            other => Err(Error::Parse(format!("unknown family '{other}'"))),
        }
    }
}
