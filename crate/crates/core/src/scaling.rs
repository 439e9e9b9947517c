//! Slowly varying functions `L`, normalizations `a_n = n^{1/alpha} L(n)`, the
//! implicit scaling `h^2 = n log h` and the ratio gap `|1 - L(n)/L(2n)|`.
//!
//! Everything is evaluated from `log n`, so `n` itself may be far beyond the
//! range of `f64` (the divergence sequences run along `n = 2^k`, `k <= 10^6`).

use std::f64::consts::{LN_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma;
use crate::summands::{parse_params, reject_unknown, take, Family};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ScalingKind {
    /// `L = 1`: the normal domain of attraction.
    Constant,
    /// `L(n) = (log n)^r`.
    PowerLog { r: f64 },
    /// `L(n) = log log n`.
    LogLog,
    /// `a_n = h(n)` with `h^2 = n log h` (alpha = 2 only).
    ImplicitH,
    /// `a_n = sqrt(n log n / 2)` (alpha = 2 only).
    Natural,
    /// `L` tabulated at increasing `n`, interpolated linearly in `(log n, log L)`.
    Table { points: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRule {
    pub alpha: f64,
    pub kind: ScalingKind,
}

/// `(log n_k)^{1+eps} |1 - L(n_k)/L(2 n_k)|` along `n_k = 2^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceSequence {
    pub k_start: u64,
    pub values: Vec<f64>,
}

impl DivergenceSequence {
    pub fn running_max(&self) -> Vec<f64> {
        self.values
            .iter()
            .scan(f64::NEG_INFINITY, |m, &v| {
                *m = m.max(v);
                Some(*m)
            })
            .collect()
    }

    pub fn value_at(&self, k: u64) -> Option<f64> {
        k.checked_sub(self.k_start).and_then(|i| self.values.get(i as usize).copied())
    }

    /// Running maximum up to and including index `k`.
    pub fn max_through(&self, k: u64) -> Option<f64> {
        let i = k.checked_sub(self.k_start)? as usize;
        self.values.get(..=i).map(|s| s.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Result of [`calibrate_gamma`] together with its doubling check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub gamma: f64,
    pub gamma_doubled: f64,
    pub relative_change: f64,
}

/// Default relative tolerance of the doubling check in [`calibrate_gamma`].
pub const CALIBRATION_TOL: f64 = 1e-2;

impl ScalingRule {
    pub fn new(alpha: f64, kind: ScalingKind) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 2]")));
        }
        match &kind {
            ScalingKind::ImplicitH | ScalingKind::Natural if alpha != 2.0 => {
                return Err(Error::InvalidParameter(
                    "the implicit-h and natural scalings require alpha = 2".into(),
                ))
            }
            ScalingKind::PowerLog { r } if !r.is_finite() => {
                return Err(Error::InvalidParameter(format!("r = {r} must be finite")))
            }
            ScalingKind::Table { points } => {
                if points.len() < 2 {
                    return Err(Error::InvalidParameter("a table needs at least two points".into()));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) || points.iter().any(|p| !(p.0 >= 2.0 && p.1 > 0.0)) {
                    return Err(Error::InvalidParameter(
                        "table abscissae must increase from n >= 2 with positive L".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(Self { alpha, kind })
    }

    pub fn constant(alpha: f64) -> Result<Self> {
        Self::new(alpha, ScalingKind::Constant)
    }

    pub fn power_log(alpha: f64, r: f64) -> Result<Self> {
        Self::new(alpha, ScalingKind::PowerLog { r })
    }

    pub fn implicit_h() -> Self {
        Self {
            alpha: 2.0,
            kind: ScalingKind::ImplicitH,
        }
    }

    pub fn natural() -> Self {
        Self {
            alpha: 2.0,
            kind: ScalingKind::Natural,
        }
    }

    /// Parses `const`, `powerlog:r=<real>`, `loglog`, `kk` or `natural`.
    pub fn parse(spec: &str, alpha: f64) -> Result<Self> {
        let (name, body) = spec.split_once(':').unwrap_or((spec, ""));
        let params = parse_params(body)?;
        let kind = match name.trim() {
            "const" => ScalingKind::Constant,
            "powerlog" => {
                reject_unknown(&params, &["r"])?;
                let r = take(&params, "r").ok_or_else(|| Error::Parse(format!("'{spec}' is missing r=")))?;
                ScalingKind::PowerLog { r }
            }
            "loglog" => ScalingKind::LogLog,
            "kk" => ScalingKind::ImplicitH,
            "natural" => ScalingKind::Natural,
            other => return Err(Error::Parse(format!("unknown scaling '{other}'"))),
        };
        if !matches!(kind, ScalingKind::PowerLog { .. }) && !params.is_empty() {
            return Err(Error::Parse(format!("scaling '{name}' takes no parameters")));
        }
        Self::new(alpha, kind)
    }

    /// Smallest `log n` at which the rule is defined (exclusive for
    /// log-log and implicit-h).
    fn min_log_n(&self) -> (f64, bool) {
        match self.kind {
            ScalingKind::LogLog => (1.0, true),
            ScalingKind::ImplicitH => (1.0 + LN_2, true),
            ScalingKind::Table { ref points } => (points[0].0.ln(), false),
            _ => (LN_2, false),
        }
    }

    fn check_domain(&self, ln_n: f64) -> Result<()> {
        let (lo, strict) = self.min_log_n();
        let ok = if strict { ln_n > lo } else { ln_n >= lo - 1e-15 };
        if ok && ln_n.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{self} is defined for log n {} {lo:.6}, got log n = {ln_n}",
                if strict { ">" } else { ">=" }
            )))
        }
    }

    /// `log L(n)` as a function of `log n`.
    pub fn ln_l(&self, ln_n: f64) -> Result<f64> {
        self.check_domain(ln_n)?;
        Ok(match &self.kind {
            ScalingKind::Constant => 0.0,
            ScalingKind::PowerLog { r } => r * ln_n.ln(),
            ScalingKind::LogLog => ln_n.ln().ln(),
            ScalingKind::ImplicitH => solve_h_ln(ln_n)? - 0.5 * ln_n,
            ScalingKind::Natural => 0.5 * (ln_n.ln() - LN_2),
            ScalingKind::Table { points } => {
                let last = points[points.len() - 1];
                if ln_n > last.0.ln() + 1e-12 {
                    return Err(Error::Domain(format!("n beyond the table end {}", last.0)));
                }
                let i = points.partition_point(|p| p.0.ln() <= ln_n).clamp(1, points.len() - 1);
                let (x0, y0) = (points[i - 1].0.ln(), points[i - 1].1.ln());
                let (x1, y1) = (points[i].0.ln(), points[i].1.ln());
                y0 + (y1 - y0) * (ln_n - x0) / (x1 - x0)
            }
        })
    }

    pub fn eval_l(&self, n: f64) -> Result<f64> {
        self.ln_l(ln_checked(n)?).map(f64::exp)
    }

    /// `log a_n` as a function of `log n`.
    pub fn ln_a_n(&self, ln_n: f64) -> Result<f64> {
        match self.kind {
            ScalingKind::ImplicitH => {
                self.check_domain(ln_n)?;
                solve_h_ln(ln_n)
            }
            _ => Ok(ln_n / self.alpha + self.ln_l(ln_n)?),
        }
    }

    pub fn eval_a_n(&self, n: f64) -> Result<f64> {
        self.ln_a_n(ln_checked(n)?).map(f64::exp)
    }

    /// `|1 - L(n)/L(2n)|` from `log n`.
    pub fn gap_ln(&self, ln_n: f64) -> Result<f64> {
        let d = match self.kind {
            ScalingKind::Constant => return Ok(0.0),
            ScalingKind::PowerLog { r } => -r * (LN_2 / ln_n).ln_1p(),
            ScalingKind::Natural => -0.5 * (LN_2 / ln_n).ln_1p(),
            ScalingKind::LogLog => ln_n.ln().ln() - (ln_n + LN_2).ln().ln(),
            _ => self.ln_l(ln_n)? - self.ln_l(ln_n + LN_2)?,
        };
        self.check_domain(ln_n)?;
        Ok(d.exp_m1().abs())
    }

    pub fn gap(&self, n: f64) -> Result<f64> {
        self.gap_ln(ln_checked(n)?)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ScalingKind::Constant)
    }
}

fn ln_checked(n: f64) -> Result<f64> {
    if !(n >= 2.0) || !n.is_finite() {
        return Err(Error::Domain(format!("n must be a finite real >= 2, got {n}")));
    }
    Ok(n.ln())
}

impl fmt::Display for ScalingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ScalingKind::Constant => write!(f, "const"),
            ScalingKind::PowerLog { r } => write!(f, "powerlog:r={r}"),
            ScalingKind::LogLog => write!(f, "loglog"),
            ScalingKind::ImplicitH => write!(f, "kk"),
            ScalingKind::Natural => write!(f, "natural"),
            ScalingKind::Table { points } => write!(f, "table[{}]", points.len()),
        }
    }
}

/// `log h` for the larger root of `h^2 = n log h`, given `log n`.
///
/// With `u = log h` the equation reads `2u - log u = log n`, convex in `u`
/// with its minimum at `u = 1/2`; a root above `1/2` exists iff `n > 2e`.
/// Newton starts from `(log n + log log n - log 2)/2`, safeguarded by
/// bisection on the bracket `[1/2, max(log n, 1)]`.
pub fn solve_h_ln(ln_n: f64) -> Result<f64> {
    let f = |u: f64| 2.0 * u - u.ln() - ln_n;
    if !(ln_n > 1.0 + LN_2) {
        return Err(Error::NoRoot(ln_n.exp()));
    }
    let (mut lo, mut hi) = (0.5, ln_n.max(1.0));
    let mut u = 0.5 * (ln_n + ln_n.ln() - LN_2);
    if !(u > lo && u < hi) {
        u = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let fu = f(u);
        if fu > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let step = fu / (2.0 - 1.0 / u);
        let mut next = u - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 4.0 * f64::EPSILON * u {
            u = next;
            let residual = f(u).exp_m1().abs();
            if residual > 1e-12 {
                return Err(Error::NonConvergence(format!("h residual {residual:e} for log n = {ln_n}")));
            }
            return Ok(u);
        }
        u = next;
    }
    Err(Error::NonConvergence(format!("Newton for h did not settle at log n = {ln_n}")))
}

pub fn solve_h(n: f64) -> Result<f64> {
    if !(n > 2.0 * std::f64::consts::E) {
        return Err(Error::NoRoot(n));
    }
    solve_h_ln(n.ln()).map(f64::exp)
}

/// `c_n = h(n) / sqrt(n log n / 2) - 1`, from `log n`.
pub fn c_n_ln(ln_n: f64) -> Result<f64> {
    let u = solve_h_ln(ln_n)?;
    Ok((u - 0.5 * (ln_n + ln_n.ln() - LN_2)).exp_m1())
}

/// `(log n_k)^{1+eps} |1 - L(n_k)/L(2n_k)|` along `n_k = 2^k`, from the first
/// `k >= 1` at which the rule is defined up to `k_max`.
pub fn proposition_divergence(rule: &ScalingRule, epsilon: f64, k_max: u64) -> Result<DivergenceSequence> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be >= 0")));
    }
    let k_start = (1..=k_max.max(1))
        .find(|&k| rule.check_domain(k as f64 * LN_2).is_ok())
        .ok_or_else(|| Error::Domain(format!("{rule} undefined for all n = 2^k, k <= {k_max}")))?;
    let values = (k_start..=k_max)
        .map(|k| {
            let ln_n = k as f64 * LN_2;
            rule.gap_ln(ln_n).map(|g| ln_n.powf(1.0 + epsilon) * g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DivergenceSequence { k_start, values })
}

/// `Gamma(1 - alpha) cos(pi alpha / 2)`, the constant in
/// `1 - phi(t) ~ C K(alpha) |t|^alpha` for tails `P(|X| > x) ~ C x^{-alpha}`.
fn stable_tail_factor(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        PI / 2.0
    } else {
        gamma(1.0 - alpha) * (PI * alpha / 2.0).cos()
    }
}

/// Scale of the symmetric stable limit of `S_n / a_n`, calibrated at a finite
/// `n_cal`: `gamma = (n u(t0 / a_n))^{1/alpha} / |t0|` with `u = 1 - phi`.
/// Fails when doubling `n_cal` moves `gamma` by more than `tol` (relative).
pub fn calibrate_gamma(family: &Family, rule: &ScalingRule, t0: f64, n_cal: f64, tol: f64) -> Result<Calibration> {
    if t0 == 0.0 || !t0.is_finite() {
        return Err(Error::InvalidParameter("t0 must be nonzero".into()));
    }
    let at = |ln_n: f64| -> Result<f64> {
        let s = (t0.abs().ln() - rule.ln_a_n(ln_n)?).exp();
        let u = family.one_minus_cf(s)?;
        if !u.is_normal() {
            return Err(Error::Domain(format!("1 - phi(t0/a_n) = {u:e} is below the resolvable range; lower n_cal")));
        }
        Ok(((ln_n + u.ln()) / rule.alpha).exp() / t0.abs())
    };
    let ln_n = ln_checked(n_cal)?;
    let gamma = at(ln_n)?;
    let gamma_doubled = at(ln_n + LN_2)?;
    let relative_change = (gamma_doubled / gamma - 1.0).abs();
    if relative_change > tol {
        return Err(Error::NonConvergence(format!(
            "calibrated gamma moved by {relative_change:e} (> {tol:e}) when doubling n_cal = {n_cal:e}"
        )));
    }
    Ok(Calibration {
        gamma,
        gamma_doubled,
        relative_change,
    })
}

/// Exact limiting scale where the tail asymptotics of the family and the
/// form of the scaling pin it down analytically; `None` otherwise.
pub fn limit_gamma(family: &Family, rule: &ScalingRule) -> Option<f64> {
    if (family.tail_index() - rule.alpha).abs() > 1e-12 {
        return None;
    }
    match family {
        Family::Cubic(c) => {
            // n u(t/a_n) -> (A / (4 kappa)) t^2 when a_n^2 ~ kappa n log n
            let kappa = match rule.kind {
                ScalingKind::PowerLog { r } if (r - 0.5).abs() < 1e-12 => 1.0,
                ScalingKind::Natural | ScalingKind::ImplicitH => 0.5,
                _ => return None,
            };
            Some((c.amplitude / (4.0 * kappa)).sqrt())
        }
        Family::Pareto(p) => match rule.kind {
            ScalingKind::Constant => Some(p.x0 * stable_tail_factor(p.alpha).powf(1.0 / p.alpha)),
            _ => None,
        },
        Family::ParetoLog(p) => {
            let r = match rule.kind {
                ScalingKind::Constant => 0.0,
                ScalingKind::PowerLog { r } => r,
                _ => return None,
            };
            if (r - p.beta / p.alpha).abs() > 1e-12 {
                return None;
            }
            // n P(|X| > a_n y) -> c alpha^{-beta} y^{-alpha} for a_n = n^{1/alpha} (log n)^{beta/alpha}
            let scale = p.tail_constant() * p.alpha.powf(-p.beta) * stable_tail_factor(p.alpha);
            Some(scale.powf(1.0 / p.alpha))
        }
    }
}

/// The normalization under which a family converges with the exact limits of
/// [`limit_gamma`]: `kk` for cubic tails, `const` for Pareto and
/// `powerlog:r=beta/alpha` for Pareto-log tails.
pub fn natural_rule_for(family: &Family) -> ScalingRule {
    match family {
        Family::Cubic(_) => ScalingRule::implicit_h(),
        Family::Pareto(p) => ScalingRule {
            alpha: p.alpha,
            kind: ScalingKind::Constant,
        },
        Family::ParetoLog(p) => ScalingRule {
            alpha: p.alpha,
            kind: ScalingKind::PowerLog { r: p.beta / p.alpha },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rules() -> Vec<ScalingRule> {
        vec![
            ScalingRule::power_log(2.0, 0.5).unwrap(),
            ScalingRule::power_log(1.5, 2.0 / 3.0).unwrap(),
            ScalingRule::power_log(2.0, -1.0).unwrap(),
            ScalingRule::new(2.0, ScalingKind::LogLog).unwrap(),
            ScalingRule::implicit_h(),
            ScalingRule::natural(),
        ]
    }

    #[test]
    fn eval_l_examples() {
        let r = ScalingRule::power_log(2.0, 0.5).unwrap();
        assert!((r.eval_l(E.powi(4)).unwrap() - 2.0).abs() < 1e-14);
        let c = ScalingRule::constant(1.3).unwrap();
        for &n in &[2.0, 1e5, 1e300] {
            assert_eq!(c.eval_l(n).unwrap(), 1.0);
        }
        let ll = ScalingRule::new(2.0, ScalingKind::LogLog).unwrap();
        assert!((ll.eval_l(E.powf(E * E)).unwrap() - 2.0).abs() < 1e-13);
        assert!(matches!(r.eval_l(1.5), Err(Error::Domain(_))));
        assert!(matches!(ll.eval_l(2.5), Err(Error::Domain(_))));
    }

    #[test]
    fn solve_h_examples() {
        let n = E * E;
        assert!((solve_h(n).unwrap() - E).abs() < 1e-12);
        assert!(c_n_ln(2.0).unwrap().abs() < 1e-14);
        // n = 10^100
        let ln_n = 100.0 * 10f64.ln();
        let u = solve_h_ln(ln_n).unwrap();
        assert!((2.0 * u - u.ln() - ln_n).exp_m1().abs() <= 1e-12);
        let c = c_n_ln(ln_n).unwrap();
        assert!(c > 0.0 && c < 0.1, "c_n = {c}");
        assert!(matches!(solve_h(2.0 * E), Err(Error::NoRoot(_))));
        assert!(matches!(solve_h(3.0), Err(Error::NoRoot(_))));
        // just above the threshold the larger root sits just above sqrt(e)
        let h = solve_h(2.0 * E * (1.0 + 1e-6)).unwrap();
        assert!(h > E.sqrt());
    }

    #[test]
    fn solve_h_inverse_consistency() {
        for &h in &[3.0f64, 10.0, 1e6] {
            let n = h * h / h.ln();
            let back = solve_h(n).unwrap();
            assert!((back / h - 1.0).abs() < 1e-10, "h={h}: {back}");
        }
    }

    #[test]
    fn c_n_normalized_tends_to_one() {
        let mut prev_dist = f64::INFINITY;
        for e in (10..=300).step_by(10) {
            let ln_n = e as f64 * 10f64.ln();
            let v = c_n_ln(ln_n).unwrap() * 2.0 * ln_n / ln_n.ln();
            let dist = (v - 1.0).abs();
            assert!(dist < prev_dist, "not monotone at 10^{e}: {v}");
            prev_dist = dist;
        }
        let ln_n = 300.0 * 10f64.ln();
        let v = c_n_ln(ln_n).unwrap() * 2.0 * ln_n / ln_n.ln();
        assert!(v > 0.8 && v < 1.2, "{v}");
    }

    #[test]
    fn gap_examples_and_limits() {
        let c = ScalingRule::constant(2.0).unwrap();
        assert_eq!(c.gap(1e8).unwrap(), 0.0);
        let ln_n = 300.0 * 10f64.ln();
        let half = ScalingRule::power_log(2.0, 0.5).unwrap();
        let v = ln_n * half.gap_ln(ln_n).unwrap();
        assert!((v / (LN_2 / 2.0) - 1.0).abs() < 0.01, "{v}");
        for &r in &[0.5, 1.0, 2.0] {
            let rule = ScalingRule::power_log(2.0, r).unwrap();
            let v = ln_n * rule.gap_ln(ln_n).unwrap();
            assert!((v / (r * LN_2) - 1.0).abs() < 0.01, "r={r}: {v}");
        }
    }

    #[test]
    fn gap_matches_direct_ratio_at_moderate_n() {
        for rule in rules() {
            let n = 1e6;
            let direct = (1.0 - rule.eval_l(n).unwrap() / rule.eval_l(2.0 * n).unwrap()).abs();
            assert!((rule.gap(n).unwrap() - direct).abs() < 1e-13, "{rule}");
        }
    }

    #[test]
    fn slow_variation_along_powers_of_two() {
        for rule in rules() {
            let mut prev = f64::INFINITY;
            for k in 10..200 {
                let g = rule.gap_ln(k as f64 * LN_2).unwrap();
                assert!(g < prev, "{rule} at k={k}");
                prev = g;
            }
            assert!(prev < 0.01, "{rule}: {prev}");
        }
    }

    #[test]
    fn a_n_examples_and_monotonicity() {
        let r = ScalingRule::power_log(2.0, 0.5).unwrap();
        let n = E.powi(4);
        assert!((r.eval_a_n(n).unwrap() - 2.0 * E * E).abs() < 1e-12);
        assert!((ScalingRule::implicit_h().eval_a_n(E * E).unwrap() - E).abs() < 1e-12);
        assert!((ScalingRule::natural().eval_a_n(E * E).unwrap() - E).abs() < 1e-12);
        // increasing from n = 16 on, for every rule
        for rule in rules() {
            let mut prev = 0.0;
            for k in 0..400 {
                let ln_n = 16f64.ln() + 0.1 * k as f64;
                let a = rule.ln_a_n(ln_n).unwrap();
                assert!(a > prev, "{rule}");
                prev = a;
            }
        }
    }

    #[test]
    fn divergence_examples() {
        let rule = ScalingRule::power_log(2.0, 0.5).unwrap();
        let seq = proposition_divergence(&rule, 0.1, 100_000).unwrap();
        let max = seq.running_max();
        let k_star = seq.k_start + max.iter().position(|&m| m > 1.0).unwrap() as u64;
        assert!(k_star > 10);
        let zero = proposition_divergence(&ScalingRule::constant(2.0).unwrap(), 0.1, 50).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let flat = proposition_divergence(&rule, 0.0, 100_000).unwrap();
        let last = *flat.values.last().unwrap();
        assert!((last / (LN_2 / 2.0) - 1.0).abs() < 1e-4);
        assert!(flat.values.iter().all(|&v| v < LN_2 / 2.0));
    }

    #[test]
    fn divergence_grows_without_bound() {
        // (log n)^{1+eps} gap ~ (log 2 / 2) (k log 2)^eps
        let rule = ScalingRule::power_log(2.0, 0.5).unwrap();
        let seq = proposition_divergence(&rule, 0.1, 1_000_000).unwrap();
        let base = seq.value_at(10).unwrap();
        assert!(seq.max_through(1_000_000).unwrap() > 3.0 * base);
        let ll = ScalingRule::new(2.0, ScalingKind::LogLog).unwrap();
        assert_eq!(proposition_divergence(&ll, 0.1, 10).unwrap().k_start, 2);
        assert_eq!(proposition_divergence(&ScalingRule::implicit_h(), 0.1, 10).unwrap().k_start, 3);
    }

    #[test]
    fn table_rule_interpolates() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|k| (10f64.powi(k), (k as f64 * 10f64.ln()).sqrt())).collect();
        let t = ScalingRule::new(2.0, ScalingKind::Table { points: pts }).unwrap();
        assert!((t.eval_l(1e5).unwrap() - (1e5f64).ln().sqrt()).abs() < 1e-12);
        assert!(t.eval_l(1e11).is_err());
        assert!(ScalingRule::new(2.0, ScalingKind::Table { points: vec![(10.0, 1.0)] }).is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!(ScalingRule::parse("const", 1.0).unwrap(), ScalingRule::constant(1.0).unwrap());
        let p = ScalingRule::parse("powerlog:r=0.5", 2.0).unwrap();
        assert_eq!(p.to_string(), "powerlog:r=0.5");
        assert_eq!(ScalingRule::parse("kk", 2.0).unwrap(), ScalingRule::implicit_h());
        assert_eq!(ScalingRule::parse("natural", 2.0).unwrap().to_string(), "natural");
        assert!(ScalingRule::parse("kk", 1.5).is_err());
        assert!(ScalingRule::parse("powerlog", 2.0).is_err());
        assert!(ScalingRule::parse("const:r=1", 2.0).is_err());
        assert!(ScalingRule::parse("wiggle", 2.0).is_err());
    }

    #[test]
    fn calibrated_gamma_approaches_the_limit() {
        let kk = ScalingRule::implicit_h();
        let fam = Family::cubic(1.0).unwrap();
        let limit = limit_gamma(&fam, &kk).unwrap();
        assert!((limit - 0.5f64.sqrt()).abs() < 1e-15);
        let far = calibrate_gamma(&fam, &kk, 1.0, 1e300, CALIBRATION_TOL).unwrap();
        assert!((far.gamma / limit - 1.0).abs() < 0.01, "{far:?}");
        let near = calibrate_gamma(&fam, &kk, 1.0, 1e12, CALIBRATION_TOL).unwrap();
        assert!((near.gamma / limit - 1.0).abs() > (far.gamma / limit - 1.0).abs());
        let fam4 = Family::cubic(4.0).unwrap();
        assert!((limit_gamma(&fam4, &kk).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let far4 = calibrate_gamma(&fam4, &kk, 1.0, 1e300, CALIBRATION_TOL).unwrap();
        assert!((far4.gamma / 2f64.sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn pareto_calibration_is_consistent_across_t0() {
        let fam = Family::pareto(1.0).unwrap();
        let rule = ScalingRule::constant(1.0).unwrap();
        let limit = limit_gamma(&fam, &rule).unwrap();
        assert!((limit - PI / 2.0).abs() < 1e-14);
        let gs: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&t0| calibrate_gamma(&fam, &rule, t0, 1e12, CALIBRATION_TOL).unwrap().gamma)
            .collect();
        for g in &gs {
            assert!((g / limit - 1.0).abs() < 1e-9, "{gs:?}");
        }
    }

    #[test]
    fn paretolog_limit_matches_far_calibration() {
        let fam = Family::pareto_log(1.5, 1.0).unwrap();
        let rule = natural_rule_for(&fam);
        let limit = limit_gamma(&fam, &rule).unwrap();
        let far = calibrate_gamma(&fam, &rule, 1.0, 1e100, CALIBRATION_TOL).unwrap();
        assert!((far.gamma / limit - 1.0).abs() < 0.02, "{} vs {limit}", far.gamma);
        assert!(matches!(calibrate_gamma(&fam, &rule, 1.0, 1e300, CALIBRATION_TOL), Err(Error::Domain(_))));
    }

    #[test]
    fn calibration_rejects_moving_targets() {
        // const scaling with alpha = 2 for cubic tails diverges like sqrt(log n)
        let fam = Family::cubic(1.0).unwrap();
        let rule = ScalingRule::constant(2.0).unwrap();
        let r = calibrate_gamma(&fam, &rule, 1.0, 1e6, 1e-3);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
        assert!(limit_gamma(&fam, &rule).is_none());
    }
}
