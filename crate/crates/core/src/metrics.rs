//! Kolmogorov and sup-density distances, the scaling operators `T_a` and
//! `tau_a`, and numerical checks of the two convolution lemmas for the
//! Kolmogorov metric.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{sample_law_on_grid, GridSpec, SampledDistribution, ENVELOPE_TOL};
use crate::quad;
use crate::rng;
use crate::stable::StableLaw;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub value: f64,
    pub argmax_x: f64,
    /// Change of the value under local refinement of the grid maximum.
    pub refinement_error: f64,
}

impl DistanceReport {
    pub fn accepted(&self) -> bool {
        self.refinement_error < self.value / 10.0 || self.refinement_error == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Quantity {
    Cdf,
    Density,
}

/// `sup_x |F_n(x) - F(x)|` for the law sampled in `dist` against a stable law.
pub fn kolmogorov(dist: &SampledDistribution, law: &StableLaw) -> Result<DistanceReport> {
    let reference = law_on_matching_grid(dist, law)?;
    compare(dist, law, &reference, Quantity::Cdf)
}

/// `sup_x |rho_n(x) - rho(x)|`.
pub fn sup_density_distance(dist: &SampledDistribution, law: &StableLaw) -> Result<DistanceReport> {
    let reference = law_on_matching_grid(dist, law)?;
    compare(dist, law, &reference, Quantity::Density)
}

/// Both distances, sampling the stable law on the grid once.
pub fn distances(dist: &SampledDistribution, law: &StableLaw) -> Result<(DistanceReport, DistanceReport)> {
    let reference = law_on_matching_grid(dist, law)?;
    Ok((
        compare(dist, law, &reference, Quantity::Cdf)?,
        compare(dist, law, &reference, Quantity::Density)?,
    ))
}

/// The stable law on the x-grid of `dist`, with the frequency cutoff raised
/// to the law's own envelope when it decays more slowly than `Phi_n`.
pub fn law_on_matching_grid(dist: &SampledDistribution, law: &StableLaw) -> Result<SampledDistribution> {
    let mut grid = dist.grid.clone();
    let cutoff = 1.05 * (-ENVELOPE_TOL.ln()).powf(1.0 / law.alpha) / law.gamma;
    grid.t_max = grid.t_max.max(cutoff).min(PI / grid.dx());
    grid.envelope_tol = ENVELOPE_TOL.max(dist.grid.envelope_tol);
    grid.tail_tol = f64::INFINITY;
    sample_law_on_grid(law, &grid)
}

fn compare(dist: &SampledDistribution, law: &StableLaw, reference: &SampledDistribution, q: Quantity) -> Result<DistanceReport> {
    if dist.grid.points != reference.grid.points || dist.grid.x_max != reference.grid.x_max {
        return Err(Error::Grid("distributions live on different grids".into()));
    }
    let (ours, theirs) = match q {
        Quantity::Cdf => (&dist.cdf_values, &reference.cdf_values),
        Quantity::Density => (&dist.density_values, &reference.density_values),
    };
    let diff: Vec<f64> = ours.iter().zip(theirs).map(|(a, b)| (a - b).abs()).collect();
    let mut best = 0;
    for (j, &d) in diff.iter().enumerate() {
        if d > diff[best] {
            best = j;
        }
    }
    let points = dist.grid.points;
    // the mirror of a negative argmax is reported when it ties
    if dist.x(best) < 0.0 && best > 0 {
        let mirror = points - best;
        if diff[mirror] >= diff[best] * (1.0 - 1e-9) {
            best = mirror;
        }
    }
    let grid_value = diff[best];
    let dx = dist.grid.dx();
    let x0 = dist.x(best);
    let exact = |x: f64| -> f64 {
        let r = match q {
            Quantity::Cdf => law.cdf(x).map(|f| dist.cdf_at(x) - f),
            Quantity::Density => law.density(x).map(|f| dist.density_at(x) - f),
        };
        r.map(f64::abs).unwrap_or(f64::NAN)
    };
    let (x_ref, v_ref) = quad::golden_max(exact, x0 - dx, x0 + dx, 1e-9 * dx.max(x0.abs()));
    let at_grid = exact(x0);
    if !v_ref.is_finite() || !at_grid.is_finite() {
        return Err(Error::NonConvergence(format!("stable evaluator failed near x = {x0}")));
    }
    let (value, argmax_x) = if v_ref >= at_grid { (v_ref, x_ref) } else { (at_grid, x0) };
    Ok(DistanceReport {
        value,
        argmax_x,
        refinement_error: (value - grid_value).abs(),
    })
}

/// `sup |f - g|` over `[lo, hi]` by a uniform scan with `samples` points plus
/// the extra abscissae, refined by golden-section search around the best one.
pub fn sup_distance<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: F, g: G, lo: f64, hi: f64, samples: usize, extra: &[f64]) -> DistanceReport {
    let h = (hi - lo) / (samples - 1) as f64;
    let diff = |x: f64| (f(x) - g(x)).abs();
    let mut best = (lo, diff(lo));
    for i in 1..samples {
        let x = lo + i as f64 * h;
        let d = diff(x);
        if d > best.1 || (d == best.1 && x.abs() < best.0.abs()) {
            best = (x, d);
        }
    }
    let mut from_extra = false;
    for &x in extra {
        let d = diff(x);
        if d > best.1 {
            best = (x, d);
            from_extra = true;
        }
    }
    if best.0 < 0.0 && diff(-best.0) >= best.1 * (1.0 - 1e-12) {
        best.0 = -best.0;
    }
    let grid_value = best.1;
    if from_extra {
        return DistanceReport {
            value: grid_value,
            argmax_x: best.0,
            refinement_error: 0.0,
        };
    }
    let (x, v) = quad::golden_max(diff, best.0 - h, best.0 + h, 1e-12 * h.max(best.0.abs()));
    let (value, argmax_x) = if v > grid_value { (v, x) } else { (grid_value, best.0) };
    DistanceReport {
        value,
        argmax_x,
        refinement_error: value - grid_value,
    }
}

/// `T_a G(x) = G(x / a)`: the distribution function of `a X`.
pub fn scale_cdf<F: Fn(f64) -> f64>(cdf: F, a: f64) -> Result<impl Fn(f64) -> f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale a = {a} must be positive")));
    }
    Ok(move |x: f64| cdf(x / a))
}

/// `tau_a q(x) = q(x / a) / a`: the density of `a X`.
pub fn scale_density<F: Fn(f64) -> f64>(density: F, a: f64) -> Result<impl Fn(f64) -> f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale a = {a} must be positive")));
    }
    Ok(move |x: f64| density(x / a) / a)
}

/// Laws with closed-form distribution functions for the lemma checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Law {
    PointMass(f64),
    Uniform(f64, f64),
    Gaussian { mean: f64, sd: f64 },
    Cauchy { location: f64, scale: f64 },
}

impl Law {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Law::PointMass(c) => {
                if x >= c {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Uniform(a, b) => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Law::Gaussian { mean, sd } => 0.5 * statrs::function::erf::erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2)),
            Law::Cauchy { location, scale } => 0.5 + FRAC_1_PI * ((x - location) / scale).atan(),
        }
    }

    /// Left limit `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            Law::PointMass(c) => {
                if x > c {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.cdf(x),
        }
    }

    /// Points where the distribution function jumps or has a kink.
    fn breaks(&self) -> Vec<f64> {
        match *self {
            Law::PointMass(c) => vec![c],
            Law::Uniform(a, b) => vec![a, b],
            _ => vec![],
        }
    }

    fn center(&self) -> f64 {
        match *self {
            Law::PointMass(c) => c,
            Law::Uniform(a, b) => 0.5 * (a + b),
            Law::Gaussian { mean, .. } => mean,
            Law::Cauchy { location, .. } => location,
        }
    }

    fn spread(&self) -> f64 {
        match *self {
            Law::PointMass(_) => 0.0,
            Law::Uniform(a, b) => 0.5 * (b - a),
            Law::Gaussian { sd, .. } => 8.0 * sd,
            Law::Cauchy { scale, .. } => 40.0 * scale,
        }
    }
}

/// Law of an independent sum `X + Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct SumLaw {
    parts: Vec<Law>,
}

impl SumLaw {
    pub fn of(parts: &[Law]) -> Self {
        Self { parts: parts.to_vec() }
    }

    /// `P(X + Z <= s)` by conditioning on the last smooth summand; point
    /// masses are pure shifts.
    pub fn cdf(&self, s: f64) -> f64 {
        let shift: f64 = self.parts.iter().filter_map(|l| if let Law::PointMass(c) = l { Some(*c) } else { None }).sum();
        let smooth: Vec<Law> = self.parts.iter().copied().filter(|l| !matches!(l, Law::PointMass(_))).collect();
        match smooth.len() {
            0 => {
                if s >= shift {
                    1.0
                } else {
                    0.0
                }
            }
            1 => smooth[0].cdf(s - shift),
            2 => convolve_cdf(&smooth[0], &smooth[1], s - shift),
            _ => panic!("sums of more than two continuous laws are not needed"),
        }
    }

    fn breaks(&self) -> Vec<f64> {
        let shift: f64 = self.parts.iter().filter_map(|l| if let Law::PointMass(c) = l { Some(*c) } else { None }).sum();
        let smooth: Vec<&Law> = self.parts.iter().filter(|l| !matches!(l, Law::PointMass(_))).collect();
        match smooth.len() {
            0 => vec![shift],
            1 => smooth[0].breaks().into_iter().map(|b| b + shift).collect(),
            _ => {
                let (a, b) = (smooth[0].breaks(), smooth[1].breaks());
                let mut out = Vec::new();
                for x in &a {
                    for y in &b {
                        out.push(x + y + shift);
                    }
                }
                out
            }
        }
    }

    fn center_and_spread(&self) -> (f64, f64) {
        let c = self.parts.iter().map(Law::center).sum();
        let s = self.parts.iter().map(Law::spread).sum::<f64>().max(1.0);
        (c, s)
    }
}

/// `P(X + Z <= s) = E[F_X(s - Z)]` by quadrature over the law of `Z`.
fn convolve_cdf(x: &Law, z: &Law, s: f64) -> f64 {
    let tol = 1e-13;
    let kinks: Vec<f64> = x.breaks().iter().map(|b| s - b).collect();
    let value = match *z {
        Law::Uniform(a, b) => {
            let mut br = vec![a];
            br.extend(kinks.iter().copied().filter(|&k| k > a && k < b));
            br.push(b);
            br.sort_by(f64::total_cmp);
            quad::integrate_panels(&|t: f64| x.cdf(s - t), &br, tol, tol).map(|e| e.value / (b - a))
        }
        Law::Gaussian { mean, sd } => {
            let density = |t: f64| (-0.5 * ((t - mean) / sd).powi(2)).exp() / (sd * (2.0 * PI).sqrt());
            let mut br = vec![mean - 40.0 * sd];
            br.extend(kinks.iter().copied().filter(|&k| (k - mean).abs() < 40.0 * sd));
            br.push(mean + 40.0 * sd);
            br.sort_by(f64::total_cmp);
            quad::integrate_panels(&|t: f64| x.cdf(s - t) * density(t), &br, tol, tol).map(|e| e.value)
        }
        Law::Cauchy { location, scale } => {
            // z = location + scale tan(theta) maps the law of Z to uniform theta
            let mut br = vec![-FRAC_PI_2];
            br.extend(kinks.iter().map(|&k| ((k - location) / scale).atan()));
            br.push(FRAC_PI_2);
            br.sort_by(f64::total_cmp);
            quad::integrate_panels(&|th: f64| x.cdf(s - location - scale * th.tan()), &br, tol, tol).map(|e| e.value * FRAC_1_PI)
        }
        Law::PointMass(c) => Ok(x.cdf(s - c)),
    };
    value.expect("bounded integrand of a distribution function")
}

/// Kolmogorov distance between two sums of independent closed-form laws.
/// Jumps are handled by also comparing left limits at the atoms.
pub fn kolmogorov_laws(p: &SumLaw, q: &SumLaw) -> DistanceReport {
    let (c1, s1) = p.center_and_spread();
    let (c2, s2) = q.center_and_spread();
    let lo = (c1 - s1).min(c2 - s2) - 1.0;
    let hi = (c1 + s1).max(c2 + s2) + 1.0;
    let mut extra = p.breaks();
    extra.extend(q.breaks());
    let mut best = sup_distance(|x| p.cdf(x), |x| q.cdf(x), lo, hi, 4001, &extra);
    // left limits at atoms
    let atoms: Vec<f64> = p.breaks().into_iter().chain(q.breaks()).collect();
    for &a in &atoms {
        let left = |l: &SumLaw| if l.parts.iter().all(|x| matches!(x, Law::PointMass(_))) { l.cdf(a - 1e-300f64.max(a.abs() * 1e-15)) } else { l.cdf(a) };
        let d = (left(p) - left(q)).abs();
        if d > best.value {
            best = DistanceReport {
                value: d,
                argmax_x: a,
                refinement_error: 0.0,
            };
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    /// Right-hand side: `d(X, Y)` or `d(X1, Y1) + d(X2, Y2)`.
    pub bound: f64,
    /// Left-hand side: distance between the sums.
    pub distance: f64,
    pub tolerance: f64,
}

impl LemmaCheck {
    pub fn holds(&self) -> bool {
        self.distance <= self.bound + self.tolerance
    }

    pub fn margin(&self) -> f64 {
        self.bound - self.distance
    }
}

/// Grid tolerance of the lemma checks.
pub const LEMMA_TOL: f64 = 1e-6;

/// `d(X + Z, Y + Z) <= d(X, Y)` for `Z` independent of `X` and `Y`.
pub fn lemma1_harness(x: Law, y: Law, z: Law) -> LemmaCheck {
    LemmaCheck {
        bound: kolmogorov_laws(&SumLaw::of(&[x]), &SumLaw::of(&[y])).value,
        distance: kolmogorov_laws(&SumLaw::of(&[x, z]), &SumLaw::of(&[y, z])).value,
        tolerance: LEMMA_TOL,
    }
}

/// `d(X1 + X2, Y1 + Y2) <= d(X1, Y1) + d(X2, Y2)` for independent pairs.
pub fn lemma2_harness(first: (Law, Law), second: (Law, Law)) -> LemmaCheck {
    let d1 = kolmogorov_laws(&SumLaw::of(&[first.0]), &SumLaw::of(&[first.1])).value;
    let d2 = kolmogorov_laws(&SumLaw::of(&[second.0]), &SumLaw::of(&[second.1])).value;
    LemmaCheck {
        bound: d1 + d2,
        distance: kolmogorov_laws(&SumLaw::of(&[first.0, second.0]), &SumLaw::of(&[first.1, second.1])).value,
        tolerance: LEMMA_TOL,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub failures: usize,
    /// Smallest `bound - distance` seen.
    pub worst_margin: f64,
}

impl TrialSummary {
    fn collect(checks: impl Iterator<Item = LemmaCheck>) -> Self {
        let mut s = Self {
            trials: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
        };
        for c in checks {
            s.trials += 1;
            s.failures += usize::from(!c.holds());
            s.worst_margin = s.worst_margin.min(c.margin());
        }
        s
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// A random Gaussian or Cauchy law with location in `[-2, 2]` and scale in `[0.2, 3]`.
pub fn random_law<R: Rng + ?Sized>(r: &mut R) -> Law {
    let location = r.random_range(-2.0..2.0);
    let scale = r.random_range(0.2..3.0);
    if r.random_bool(0.5) {
        Law::Gaussian { mean: location, sd: scale }
    } else {
        Law::Cauchy { location, scale }
    }
}

pub fn lemma1_random(trials: usize, seed: u64) -> TrialSummary {
    TrialSummary::collect((0..trials).map(|i| {
        let mut r = rng::stream(seed, i as u64);
        let (x, y, z) = (random_law(&mut r), random_law(&mut r), random_law(&mut r));
        lemma1_harness(x, y, z)
    }))
}

pub fn lemma2_random(trials: usize, seed: u64) -> TrialSummary {
    TrialSummary::collect((0..trials).map(|i| {
        let mut r = rng::stream(seed, i as u64);
        let first = (random_law(&mut r), random_law(&mut r));
        let second = (random_law(&mut r), random_law(&mut r));
        lemma2_harness(first, second)
    }))
}

/// Re-runs a distance on refined grids until the report is accepted.
pub fn accepted_distance<F>(grid: &GridSpec, mut measure: F) -> Result<(DistanceReport, GridSpec)>
where
    F: FnMut(&GridSpec) -> Result<DistanceReport>,
{
    let mut g = grid.clone();
    for _ in 0..=3 {
        let r = measure(&g)?;
        if r.accepted() {
            return Ok((r, g));
        }
        g = g.refined();
    }
    Err(Error::NonConvergence(format!(
        "distance refinement still moves the value by more than 10% after 3 grid doublings (points = {})",
        g.points / 2
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};

    #[test]
    fn point_mass_examples_are_exact() {
        let c = lemma1_harness(Law::PointMass(0.0), Law::PointMass(1.0), Law::Uniform(0.0, 2.0));
        assert_eq!(c.bound, 1.0);
        assert!((c.distance - 0.5).abs() < 1e-15, "{c:?}");
        assert!(c.holds());
        let same = lemma1_harness(Law::Uniform(0.0, 1.0), Law::Uniform(0.0, 1.0), Law::PointMass(3.0));
        assert_eq!((same.bound, same.distance), (0.0, 0.0));
        let c2 = lemma2_harness((Law::PointMass(0.0), Law::PointMass(1.0)), (Law::Uniform(0.0, 2.0), Law::Uniform(1.0, 3.0)));
        assert!((c2.bound - 1.5).abs() < 1e-15 && (c2.distance - 1.0).abs() < 1e-15, "{c2:?}");
        assert!(c2.margin() > 0.4);
    }

    #[test]
    fn convolution_of_gaussians_is_gaussian() {
        let s = SumLaw::of(&[Law::Gaussian { mean: 1.0, sd: 0.6 }, Law::Gaussian { mean: -0.5, sd: 0.8 }]);
        let n = Normal::new(0.5, 1.0).unwrap();
        for &x in &[-2.0, 0.1, 0.5, 3.0] {
            assert!((s.cdf(x) - n.cdf(x)).abs() < 1e-11, "{x}: {} vs {}", s.cdf(x), n.cdf(x));
        }
        let c = SumLaw::of(&[Law::Cauchy { location: 0.0, scale: 1.0 }, Law::Cauchy { location: 1.0, scale: 2.0 }]);
        for &x in &[-20.0f64, 0.0, 1.0, 7.0] {
            let exact = 0.5 + ((x - 1.0) / 3.0).atan() / PI;
            assert!((c.cdf(x) - exact).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn cauchy_against_iqr_matched_gaussian() {
        // both laws have quartiles at +-1; the CDF gap peaks where the
        // densities cross, x = 3.1094351445 (bisection on f - g)
        let sd = 1.0 / 0.674_489_750_196_081_7;
        let n = Normal::new(0.0, sd).unwrap();
        let r = sup_distance(|x| 0.5 + x.atan() / PI, |x| n.cdf(x), -30.0, 30.0, 20_001, &[]);
        assert!((r.value - 0.081_059_503_597_397_11).abs() < 1e-12, "{r:?}");
        assert!((r.argmax_x - 3.109_435_144_509_231).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn random_trials_hold() {
        let l1 = lemma1_random(20, 7);
        assert!(l1.passed(), "{l1:?}");
        let l2 = lemma2_random(20, 8);
        assert!(l2.passed(), "{l2:?}");
    }

    #[test]
    fn scaling_operators() {
        let n = Normal::new(0.0, 1.0).unwrap();
        let t2 = scale_cdf(|x| n.cdf(x), 2.0).unwrap();
        assert_eq!(t2(2.0), n.cdf(1.0));
        assert!((t2(2.0) - 0.841_345).abs() < 1e-6);
        let id = scale_cdf(|x| n.cdf(x), 1.0).unwrap();
        let back = scale_cdf(scale_cdf(|x| n.cdf(x), 3.0).unwrap(), 1.0 / 3.0).unwrap();
        for i in -50..50 {
            let x = i as f64 * 0.1;
            assert_eq!(id(x), n.cdf(x));
            assert!((back(x) - n.cdf(x)).abs() <= 1e-15);
        }
        assert!(scale_cdf(|x| x, 0.0).is_err());
        assert!(scale_density(|x| x, -1.0).is_err());
        let tau = scale_density(|x| n.pdf(x), 2.0).unwrap();
        let wide = Normal::new(0.0, 2.0).unwrap();
        for i in -50..50 {
            let x = i as f64 * 0.2;
            assert!((tau(x) - wide.pdf(x)).abs() < 1e-16);
        }
        // ||tau_a q - tau_a p|| a = ||q - p||
        let c = StableLaw::cauchy(1.0).unwrap();
        let q = |x: f64| n.pdf(x);
        let p = |x: f64| c.density(x).unwrap();
        let base = sup_distance(q, p, -10.0, 10.0, 2001, &[]);
        let scaled = sup_distance(scale_density(q, 3.0).unwrap(), scale_density(p, 3.0).unwrap(), -30.0, 30.0, 2001, &[]);
        assert!((scaled.value * 3.0 - base.value).abs() < 1e-12 * base.value, "{scaled:?} {base:?}");
    }

    #[test]
    fn kolmogorov_scale_invariance_and_axioms() {
        let f = SumLaw::of(&[Law::Gaussian { mean: 0.0, sd: 1.0 }]);
        let g = SumLaw::of(&[Law::Cauchy { location: 0.3, scale: 0.7 }]);
        let h = SumLaw::of(&[Law::Uniform(-1.0, 2.0)]);
        let d = |a: &SumLaw, b: &SumLaw| kolmogorov_laws(a, b).value;
        assert_eq!(d(&f, &f), 0.0);
        assert!((d(&f, &g) - d(&g, &f)).abs() < 1e-15);
        assert!(d(&f, &h) <= d(&f, &g) + d(&g, &h) + 1e-12);
        let base = d(&f, &g);
        let fa = scale_cdf(|x| f.cdf(x), 2.5).unwrap();
        let ga = scale_cdf(|x| g.cdf(x), 2.5).unwrap();
        let scaled = sup_distance(fa, ga, -100.0, 100.0, 40001, &[]);
        assert!((scaled.value - base).abs() < 1e-10, "{} vs {base}", scaled.value);
    }

    #[test]
    fn gaussian_variance_perturbation() {
        let eps = 1e-3;
        let n = Normal::new(0.0, 1.0).unwrap();
        let m = Normal::new(0.0, 1.0 + eps).unwrap();
        let d = sup_distance(|x| n.cdf(x), |x| m.cdf(x), -8.0, 8.0, 1601, &[]);
        let lead = eps * (-0.5f64).exp() / (2.0 * PI).sqrt();
        assert!((d.value / lead - 1.0).abs() < 2.0 * eps, "{d:?}");
        assert!((d.argmax_x - 1.0).abs() < 0.01);
        let r = sup_distance(|x| n.pdf(x), |x| m.pdf(x), -8.0, 8.0, 1601, &[]);
        assert!((r.value / (eps / (2.0 * PI).sqrt()) - 1.0).abs() < 2.0 * eps, "{r:?}");
    }

    fn scan(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
        (0..=400_000).map(|i| -20.0 + i as f64 * 1e-4).map(|x| (f(x) - g(x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn sampled_law_distances() {
        let law = StableLaw::gaussian(1.0).unwrap();
        let grid = GridSpec::for_law(&law).unwrap();
        let d = sample_law_on_grid(&law, &grid).unwrap();
        let (k, s) = distances(&d, &law).unwrap();
        assert!(k.value <= 1e-7 && s.value <= 1e-7, "{k:?} {s:?}");

        // Cauchy(1) against the Gaussian with the same quartiles
        let cauchy = StableLaw::cauchy(1.0).unwrap();
        let sd = 1.0 / 0.674_489_750_196_081_7;
        let gauss = StableLaw::gaussian(sd * sd).unwrap();
        let grid = GridSpec::for_law(&cauchy).unwrap();
        let dc = sample_law_on_grid(&cauchy, &grid).unwrap();
        let k = kolmogorov(&dc, &gauss).unwrap();
        let normal = Normal::new(0.0, sd).unwrap();
        let oracle = scan(|x| 0.5 + x.atan() / PI, |x| normal.cdf(x));
        assert!((k.value - oracle).abs() < 1e-6, "{k:?} vs {oracle}");
        assert!(k.argmax_x > 0.0 && k.accepted());
    }
}
