//! Right-hand sides of the two lower bounds, their verification against the
//! measured distances, and rate fits for the power-log probe and the
//! cubic-tail example.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{compute_distribution, GridSpec};
use crate::metrics::{distances, DistanceReport};
use crate::quad;
use crate::scaling::{calibrate_gamma, limit_gamma, ScalingKind, ScalingRule, CALIBRATION_TOL};
use crate::stable::StableLaw;
use crate::summands::Family;

pub const DEFAULT_C: f64 = 0.9;
/// Smallest `n` at which the bounds are asserted.
pub const DEFAULT_THRESHOLD: f64 = 1e4;
pub const DEFAULT_MARGIN_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub c: f64,
    pub threshold_n: f64,
    pub margin_tol: f64,
    /// Calibration point used when no exact limit scale is known.
    pub n_cal: f64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            threshold_n: DEFAULT_THRESHOLD,
            margin_tol: DEFAULT_MARGIN_TOL,
            n_cal: 1e12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub n: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub z_star: f64,
    pub c_used: f64,
    pub margin: f64,
    /// Whether `n` is past the threshold from which the bound is enforced.
    pub asserted: bool,
}

impl BoundCheck {
    fn new(n: f64, lhs: f64, rhs: f64, z_star: f64, c: f64, cfg: &HarnessConfig) -> Self {
        Self {
            n,
            lhs,
            rhs,
            z_star,
            c_used: c,
            margin: lhs - rhs,
            asserted: n >= cfg.threshold_n,
        }
    }

    pub fn violated(&self, tol: f64) -> bool {
        self.asserted && self.margin < -tol
    }
}

pub fn all_hold(checks: &[BoundCheck], tol: f64) -> bool {
    checks.iter().all(|c| !c.violated(tol))
}

/// `max_z |z rho(z)|` and `max_z |z rho'(z) + rho(z)|` with their nonnegative
/// maximizers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundWeights {
    pub first: f64,
    pub first_z: f64,
    pub second: f64,
    pub second_z: f64,
}

/// Scans `z in [0, 12 gamma]` and refines the best point by golden section.
pub fn bound_weights(law: &StableLaw) -> Result<BoundWeights> {
    let w1 = |z: f64| law.density(z).map(|r| (z * r).abs());
    let w2 = |z: f64| -> Result<f64> { Ok((z * law.density_derivative(z)? + law.density(z)?).abs()) };
    let (first_z, first) = maximize(&w1, 12.0 * law.gamma)?;
    let (second_z, second) = maximize(&w2, 12.0 * law.gamma)?;
    Ok(BoundWeights {
        first,
        first_z,
        second,
        second_z,
    })
}

fn maximize<F: Fn(f64) -> Result<f64>>(f: &F, hi: f64) -> Result<(f64, f64)> {
    let steps = 480;
    let h = hi / steps as f64;
    let mut best = (0.0, f(0.0)?);
    for i in 1..=steps {
        let z = i as f64 * h;
        let v = f(z)?;
        if v > best.1 {
            best = (z, v);
        }
    }
    let (lo, up) = ((best.0 - h).max(0.0), best.0 + h);
    let (z, v) = quad::golden_max(|z| f(z).unwrap_or(f64::NAN), lo, up, 1e-10 * hi);
    Ok(if v > best.1 { (z, v) } else { best })
}

/// `C max_z |z rho(z)| |1 - L(n)/L(2n)|` and the maximizing `z`.
pub fn theorem1_rhs(law: &StableLaw, rule: &ScalingRule, n: f64, c: f64) -> Result<(f64, f64)> {
    let w = bound_weights(law)?;
    theorem1_rhs_with(&w, rule, n, c)
}

pub fn theorem1_rhs_with(w: &BoundWeights, rule: &ScalingRule, n: f64, c: f64) -> Result<(f64, f64)> {
    check_c(c)?;
    Ok((c * w.first * rule.gap(n)?, w.first_z))
}

/// `C max_z |z rho'(z) + rho(z)| |1 - L(n)/L(2n)|` and the maximizing `z`.
pub fn theorem2_rhs(law: &StableLaw, rule: &ScalingRule, n: f64, c: f64) -> Result<(f64, f64)> {
    let w = bound_weights(law)?;
    theorem2_rhs_with(&w, rule, n, c)
}

pub fn theorem2_rhs_with(w: &BoundWeights, rule: &ScalingRule, n: f64, c: f64) -> Result<(f64, f64)> {
    check_c(c)?;
    Ok((c * w.second * rule.gap(n)?, w.second_z))
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("C = {c} must lie in (0, 1)")))
    }
}

/// `2^{(alpha+1)/alpha}`, the weight of `||rho_n - rho||` in the density bound.
pub fn density_prefactor(alpha: f64) -> f64 {
    2f64.powf((alpha + 1.0) / alpha)
}

/// Stable limit of `S_n / a_n`: the exact scale where known, otherwise the
/// calibrated one.
pub fn limit_law(family: &Family, rule: &ScalingRule, cfg: &HarnessConfig) -> Result<StableLaw> {
    let gamma = match limit_gamma(family, rule) {
        Some(g) => g,
        None => {
            calibrate_gamma(family, rule, 1.0, cfg.n_cal, CALIBRATION_TOL)
                .map_err(|e| Error::CalibrationMissing(format!("{family} under {rule}: {e}")))?
                .gamma
        }
    };
    StableLaw::new(rule.alpha, gamma)
}

/// Distances of the law of `S_n / a_n` to the stable limit at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub n: f64,
    pub a_n: f64,
    pub kolmogorov: DistanceReport,
    pub sup_density: DistanceReport,
    pub grid: GridSpec,
}

/// Computes both distances at `n`, doubling the grid (at most three times)
/// until the refined maxima are accepted.
pub fn measure(family: &Family, rule: &ScalingRule, n: f64, law: &StableLaw, grid: Option<&GridSpec>) -> Result<Measurement> {
    let mut g = match grid {
        Some(g) => g.clone(),
        None => GridSpec::auto(family, rule, n)?,
    };
    for attempt in 0..=3 {
        let dist = compute_distribution(family, rule, n, &g)?;
        let (k, s) = distances(&dist, law)?;
        if (k.accepted() && s.accepted()) || attempt == 3 {
            if !(k.accepted() && s.accepted()) {
                return Err(Error::NonConvergence(format!("distance refinement not accepted at n = {n} after 3 grid doublings")));
            }
            return Ok(Measurement {
                n,
                a_n: dist.a_n,
                kolmogorov: k,
                sup_density: s,
                grid: g,
            });
        }
        g = g.refined();
    }
    unreachable!("loop returns on its last attempt")
}

fn measure_pairs(family: &Family, rule: &ScalingRule, n_list: &[f64], law: &StableLaw) -> Result<Vec<(Measurement, Measurement)>> {
    check_sorted(n_list)?;
    n_list
        .par_iter()
        .map(|&n| Ok((measure(family, rule, n, law, None)?, measure(family, rule, 2.0 * n, law, None)?)))
        .collect()
}

fn check_sorted(n_list: &[f64]) -> Result<()> {
    if n_list.is_empty() || n_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("n_list must be nonempty and strictly increasing".into()));
    }
    Ok(())
}

/// Both bounds for every `n`, sharing the Fourier solves at `n` and `2n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub law: StableLaw,
    pub weights: BoundWeights,
    pub theorem1: Vec<BoundCheck>,
    pub theorem2: Vec<BoundCheck>,
}

impl Verification {
    pub fn passed(&self, tol: f64) -> bool {
        all_hold(&self.theorem1, tol) && all_hold(&self.theorem2, tol)
    }

    pub fn worst_margin(&self) -> f64 {
        self.theorem1
            .iter()
            .chain(&self.theorem2)
            .filter(|c| c.asserted)
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn verify_bounds(family: &Family, rule: &ScalingRule, n_list: &[f64], cfg: &HarnessConfig) -> Result<Verification> {
    let law = limit_law(family, rule, cfg)?;
    let weights = bound_weights(&law)?;
    let pairs = measure_pairs(family, rule, n_list, &law)?;
    let pre = density_prefactor(law.alpha);
    let mut theorem1 = Vec::new();
    let mut theorem2 = Vec::new();
    for (m, m2) in &pairs {
        let (r1, z1) = theorem1_rhs_with(&weights, rule, m.n, cfg.c)?;
        let (r2, z2) = theorem2_rhs_with(&weights, rule, m.n, cfg.c)?;
        theorem1.push(BoundCheck::new(m.n, 2.0 * m.kolmogorov.value + m2.kolmogorov.value, r1, z1, cfg.c, cfg));
        theorem2.push(BoundCheck::new(m.n, pre * m.sup_density.value + m2.sup_density.value, r2, z2, cfg.c, cfg));
    }
    Ok(Verification {
        law,
        weights,
        theorem1,
        theorem2,
    })
}

/// `2 ||F_n - F|| + ||F_2n - F|| >= C |z F'(z)| |1 - L(n)/L(2n)|` along `n_list`.
pub fn theorem1_verify(family: &Family, rule: &ScalingRule, n_list: &[f64], cfg: &HarnessConfig) -> Result<Vec<BoundCheck>> {
    verify_bounds(family, rule, n_list, cfg).map(|v| v.theorem1)
}

/// `2^{(a+1)/a} ||rho_n - rho|| + ||rho_2n - rho|| >= C |z rho' + rho| |1 - L(n)/L(2n)|`.
pub fn theorem2_verify(family: &Family, rule: &ScalingRule, n_list: &[f64], cfg: &HarnessConfig) -> Result<Vec<BoundCheck>> {
    verify_bounds(family, rule, n_list, cfg).map(|v| v.theorem2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `c / log n`
    InverseLog,
    /// `c log log n / log n`
    LogLogOverLog,
    /// `c |1 - L(n)/L(2n)|`
    Gap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: RateModel,
    /// Least-squares constant in `d(n) ~ c_hat g(n)`.
    pub c_hat: f64,
    pub window: (f64, f64),
    /// Root mean square of `d(n) / (c_hat g(n)) - 1`.
    pub residual: f64,
    /// `(n, d(n) / g(n))` for every `n` in the window.
    pub normalized: Vec<(f64, f64)>,
}

/// Minimum number of log-spaced points in a rate fit.
pub const MIN_FIT_POINTS: usize = 6;

impl RateFit {
    pub fn fit(model: RateModel, data: &[(f64, f64)], rule: Option<&ScalingRule>) -> Result<Self> {
        if data.len() < MIN_FIT_POINTS {
            return Err(Error::InvalidParameter(format!(
                "rate fits need at least {MIN_FIT_POINTS} values of n, got {}",
                data.len()
            )));
        }
        let g = |n: f64| -> Result<f64> {
            let l = n.ln();
            Ok(match model {
                RateModel::InverseLog => 1.0 / l,
                RateModel::LogLogOverLog => l.ln() / l,
                RateModel::Gap => rule
                    .ok_or_else(|| Error::InvalidParameter("the gap model needs a scaling rule".into()))?
                    .gap(n)?,
            })
        };
        let gs = data.iter().map(|&(n, _)| g(n)).collect::<Result<Vec<_>>>()?;
        let num: f64 = data.iter().zip(&gs).map(|(&(_, d), &g)| d * g).sum();
        let den: f64 = gs.iter().map(|g| g * g).sum();
        let c_hat = num / den;
        let residual = (data.iter().zip(&gs).map(|(&(_, d), &g)| (d / (c_hat * g) - 1.0).powi(2)).sum::<f64>() / data.len() as f64).sqrt();
        Ok(Self {
            model,
            c_hat,
            window: (data[0].0, data[data.len() - 1].0),
            residual,
            normalized: data.iter().zip(&gs).map(|(&(n, d), &g)| (n, d / g)).collect(),
        })
    }

    /// Minimum of the normalized sequence over `n >= from`.
    pub fn min_from(&self, from: f64) -> f64 {
        self.normalized.iter().filter(|p| p.0 >= from).map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max_from(&self, from: f64) -> f64 {
        self.normalized.iter().filter(|p| p.0 >= from).map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum over the upper half of the window (by index).
    pub fn tail_min(&self) -> f64 {
        let half = self.normalized.len() / 2;
        self.normalized[half..].iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }
}

/// `log n ||F_n - F||` along `n_list` for a power-log scaling with `r != 0`.
pub fn corollary_rate_probe(family: &Family, rule: &ScalingRule, n_list: &[f64], cfg: &HarnessConfig) -> Result<RateFit> {
    match rule.kind {
        ScalingKind::PowerLog { r } if r != 0.0 => {}
        _ => {
            return Err(Error::InvalidParameter(format!(
                "the probe needs a power-log scaling with r != 0, got {rule}"
            )))
        }
    }
    if n_list.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidParameter(format!("window of {} values is too small", n_list.len())));
    }
    check_sorted(n_list)?;
    let law = limit_law(family, rule, cfg)?;
    let data = n_list
        .par_iter()
        .map(|&n| measure(family, rule, n, &law, None).map(|m| (n, m.kolmogorov.value)))
        .collect::<Result<Vec<_>>>()?;
    RateFit::fit(RateModel::InverseLog, &data, Some(rule))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dichotomy {
    /// `||q_n - rho|| log n` under `h^2 = n log h`.
    pub kk: RateFit,
    /// `||rho_n - rho|| log n / log log n` under `sqrt(n log n / 2)`.
    pub natural: RateFit,
    /// `(n, ||q_n - rho||, ||rho_n - rho||)`.
    pub distances: Vec<(f64, f64, f64)>,
}

impl Dichotomy {
    /// `max / min - 1` of the normalized KK sequence over the last `decades`.
    pub fn kk_variation(&self, decades: f64) -> f64 {
        let from = self.kk.window.1 / 10f64.powf(decades) * (1.0 - 1e-9);
        self.kk.max_from(from) / self.kk.min_from(from) - 1.0
    }

    /// `(min, max)` of the normalized natural-scaling sequence.
    pub fn natural_band(&self) -> (f64, f64) {
        (self.natural.min_from(0.0), self.natural.max_from(0.0))
    }

    /// Whether `||rho_n - rho|| > ||q_n - rho||` for every `n >= from`.
    pub fn natural_worse_from(&self, from: f64) -> bool {
        self.distances.iter().filter(|d| d.0 >= from).all(|d| d.2 > d.1)
    }
}

/// Density distances of the cubic-tail sums under the implicit and the
/// natural scaling, normalized by their conjectured rates.
pub fn example_rate_dichotomy(amplitude: f64, n_list: &[f64]) -> Result<Dichotomy> {
    check_sorted(n_list)?;
    let decades = (n_list[n_list.len() - 1] / n_list[0]).log10();
    if decades < 6.0 - 1e-9 || n_list.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidParameter(format!(
            "the window must span at least 6 decades with {MIN_FIT_POINTS} points, got {decades:.2} decades"
        )));
    }
    let family = Family::cubic(amplitude)?;
    // Gaussian with variance A
    let law = StableLaw::gaussian(amplitude)?;
    let kk = ScalingRule::implicit_h();
    let natural = ScalingRule::natural();
    let distances = n_list
        .par_iter()
        .map(|&n| {
            let q = measure(&family, &kk, n, &law, None)?.sup_density.value;
            let r = measure(&family, &natural, n, &law, None)?.sup_density.value;
            Ok((n, q, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let q: Vec<(f64, f64)> = distances.iter().map(|d| (d.0, d.1)).collect();
    let r: Vec<(f64, f64)> = distances.iter().map(|d| (d.0, d.2)).collect();
    Ok(Dichotomy {
        kk: RateFit::fit(RateModel::InverseLog, &q, None)?,
        natural: RateFit::fit(RateModel::LogLogOverLog, &r, None)?,
        distances,
    })
}

/// One row of a convergence sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: f64,
    pub a_n: f64,
    pub kolmogorov: f64,
    pub sup_density: f64,
    pub thm1_rhs: f64,
    pub thm2_rhs: f64,
    pub gap: f64,
    pub lognorm_kolmogorov: f64,
    pub kolmogorov_argmax: f64,
    pub sup_density_argmax: f64,
    pub grid_points: usize,
    pub x_max: f64,
    pub t_max: f64,
}

impl ConvergenceRecord {
    pub const COLUMNS: [&'static str; 13] = [
        "n",
        "a_n",
        "kolmogorov",
        "sup_density",
        "thm1_rhs",
        "thm2_rhs",
        "gap",
        "lognorm_kolmogorov",
        "kolmogorov_argmax",
        "sup_density_argmax",
        "grid_points",
        "x_max",
        "t_max",
    ];

    pub fn values(&self) -> [f64; 13] {
        [
            self.n,
            self.a_n,
            self.kolmogorov,
            self.sup_density,
            self.thm1_rhs,
            self.thm2_rhs,
            self.gap,
            self.lognorm_kolmogorov,
            self.kolmogorov_argmax,
            self.sup_density_argmax,
            self.grid_points as f64,
            self.x_max,
            self.t_max,
        ]
    }
}

/// Distances and bound right-hand sides along `n_list`, in `n` order.
pub fn sweep(family: &Family, rule: &ScalingRule, n_list: &[f64], law: &StableLaw, cfg: &HarnessConfig) -> Result<Vec<ConvergenceRecord>> {
    check_sorted(n_list)?;
    let weights = bound_weights(law)?;
    n_list
        .par_iter()
        .map(|&n| {
            let m = measure(family, rule, n, law, None)?;
            let gap = rule.gap(n)?;
            Ok(ConvergenceRecord {
                n,
                a_n: m.a_n,
                kolmogorov: m.kolmogorov.value,
                sup_density: m.sup_density.value,
                thm1_rhs: theorem1_rhs_with(&weights, rule, n, cfg.c)?.0,
                thm2_rhs: theorem2_rhs_with(&weights, rule, n, cfg.c)?.0,
                gap,
                lognorm_kolmogorov: n.ln() * m.kolmogorov.value,
                kolmogorov_argmax: m.kolmogorov.argmax_x,
                sup_density_argmax: m.sup_density.argmax_x,
                grid_points: m.grid.points,
                x_max: m.grid.x_max,
                t_max: m.grid.t_max,
            })
        })
        .collect()
}

/// `10^lo, 10^{lo+1}, ..., 10^hi`.
pub fn decades(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| format!("1e{e}").parse().expect("decimal power")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_gaussian_and_cauchy() {
        let g = StableLaw::gaussian(1.0).unwrap();
        let w = bound_weights(&g).unwrap();
        assert!((w.first - 0.241_970_724_519_143_37).abs() < 1e-9 && (w.first_z - 1.0).abs() < 1e-4, "{w:?}");
        assert!((w.second - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-9 && w.second_z.abs() < 1e-4, "{w:?}");
        let c = StableLaw::cauchy(1.0).unwrap();
        let w = bound_weights(&c).unwrap();
        assert!((w.first - 1.0 / (2.0 * PI)).abs() < 1e-9 && (w.first_z - 1.0).abs() < 1e-4, "{w:?}");
        assert!((w.second - 1.0 / PI).abs() < 1e-9 && w.second_z.abs() < 1e-4, "{w:?}");
    }

    #[test]
    fn rhs_linear_in_c_and_gap() {
        let g = StableLaw::gaussian(1.0).unwrap();
        let rule = ScalingRule::power_log(2.0, 0.5).unwrap();
        let (a, z) = theorem1_rhs(&g, &rule, 1e6, 0.9).unwrap();
        let (b, _) = theorem1_rhs(&g, &rule, 1e6, 0.45).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15 && z > 0.0);
        assert!((a - 0.9 * 0.241_970_724_519_143_37 * rule.gap(1e6).unwrap()).abs() < 1e-9 * a);
        let (t2, _) = theorem2_rhs(&g, &rule, 1e6, 0.9).unwrap();
        assert!((t2 - 0.9 / (2.0 * PI).sqrt() * rule.gap(1e6).unwrap()).abs() < 1e-9 * t2);
        let flat = ScalingRule::constant(2.0).unwrap();
        assert_eq!(theorem1_rhs(&g, &flat, 1e6, 0.9).unwrap().0, 0.0);
        assert_eq!(theorem2_rhs(&g, &flat, 1e6, 0.9).unwrap().0, 0.0);
        assert!(theorem1_rhs(&g, &rule, 1e6, 1.0).is_err());
    }

    #[test]
    fn prefactors() {
        assert!((density_prefactor(2.0) - 2.828_427_124_746_19).abs() < 1e-12);
        assert_eq!(density_prefactor(1.0), 4.0);
    }

    #[test]
    fn rate_fit_recovers_constant() {
        let data: Vec<(f64, f64)> = decades(4, 9).into_iter().map(|n| (n, 0.3 / n.ln())).collect();
        let f = RateFit::fit(RateModel::InverseLog, &data, None).unwrap();
        assert!((f.c_hat - 0.3).abs() < 1e-14 && f.residual < 1e-14);
        assert!(RateFit::fit(RateModel::InverseLog, &data[..5], None).is_err());
    }

    #[test]
    fn probe_preconditions() {
        let fam = Family::cubic(1.0).unwrap();
        let cfg = HarnessConfig::default();
        assert!(corollary_rate_probe(&fam, &ScalingRule::constant(2.0).unwrap(), &decades(4, 9), &cfg).is_err());
        assert!(corollary_rate_probe(&fam, &ScalingRule::power_log(2.0, 0.0).unwrap(), &decades(4, 9), &cfg).is_err());
        assert!(corollary_rate_probe(&fam, &ScalingRule::power_log(2.0, 0.5).unwrap(), &decades(4, 6), &cfg).is_err());
        assert!(matches!(
            limit_law(&fam, &ScalingRule::constant(2.0).unwrap(), &cfg),
            Err(Error::CalibrationMissing(_))
        ));
    }

    #[test]
    fn constant_rule_passes_trivially() {
        let fam = Family::pareto(1.0).unwrap();
        let rule = ScalingRule::constant(1.0).unwrap();
        let cfg = HarnessConfig::default();
        let law = limit_law(&fam, &rule, &cfg).unwrap();
        let w = bound_weights(&law).unwrap();
        for n in decades(4, 8) {
            assert_eq!(theorem1_rhs_with(&w, &rule, n, 0.9).unwrap().0, 0.0);
        }
    }
}
