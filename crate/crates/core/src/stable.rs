//! Symmetric alpha-stable laws with characteristic function
//! `psi(t) = exp(-(gamma |t|)^alpha)`.
//!
//! Density, distribution function and density derivative are obtained by
//! inverting `psi` with panel-wise adaptive Gauss-Kronrod quadrature. Far in
//! the tails (`|x| / gamma` beyond the configured switch point, `alpha < 2`)
//! the classical power series in `|x|^{-alpha}` is used instead.

use std::f64::consts::{FRAC_1_PI, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::rng;
use crate::special::ln_gamma;

/// Quadrature settings shared by the stable evaluators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableConfig {
    pub abs_tol: f64,
    /// In units of `gamma`; beyond it the tail series is preferred.
    pub tail_switch: f64,
}

impl Default for StableConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            tail_switch: 40.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableLaw {
    pub alpha: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy)]
enum Kernel {
    Density,
    Cdf,
    Derivative,
}

impl StableLaw {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 2]")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
        }
        Ok(Self { alpha, gamma })
    }

    /// Gaussian with the given variance (`gamma = sqrt(variance / 2)`).
    pub fn gaussian(variance: f64) -> Result<Self> {
        Self::new(2.0, (variance / 2.0).sqrt())
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        Self::new(1.0, scale)
    }

    pub fn char_fn(&self, t: f64) -> f64 {
        (-(self.gamma * t.abs()).powf(self.alpha)).exp()
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        self.density_with(x, &StableConfig::default())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.cdf_with(x, &StableConfig::default())
    }

    pub fn density_derivative(&self, x: f64) -> Result<f64> {
        self.density_derivative_with(x, &StableConfig::default())
    }

    pub fn density_with(&self, x: f64, cfg: &StableConfig) -> Result<f64> {
        let y = x.abs() / self.gamma;
        if let Some(v) = self.tail_series(y, Kernel::Density, cfg) {
            return Ok(v / self.gamma);
        }
        Ok(self.invert(x.abs(), Kernel::Density, cfg)?.max(0.0))
    }

    pub fn cdf_with(&self, x: f64, cfg: &StableConfig) -> Result<f64> {
        let y = x.abs() / self.gamma;
        let upper = match self.tail_series(y, Kernel::Cdf, cfg) {
            Some(survival) => 1.0 - survival,
            None => 0.5 + self.invert(x.abs(), Kernel::Cdf, cfg)?,
        };
        let upper = upper.clamp(0.5, 1.0);
        Ok(if x >= 0.0 { upper } else { 1.0 - upper })
    }

    pub fn density_derivative_with(&self, x: f64, cfg: &StableConfig) -> Result<f64> {
        let y = x.abs() / self.gamma;
        let v = match self.tail_series(y, Kernel::Derivative, cfg) {
            Some(v) => v / (self.gamma * self.gamma),
            None => self.invert(x.abs(), Kernel::Derivative, cfg)?,
        };
        Ok(if x >= 0.0 { v } else { -v })
    }

    /// Frequency beyond which `psi` is below `e^{-45}`.
    fn cutoff(&self) -> f64 {
        45f64.powf(1.0 / self.alpha) / self.gamma
    }

    fn invert(&self, x: f64, kernel: Kernel, cfg: &StableConfig) -> Result<f64> {
        let (alpha, gamma) = (self.alpha, self.gamma);
        let envelope = move |t: f64| (-(gamma * t).powf(alpha)).exp();
        let top = self.cutoff();
        let panel = if x > 0.0 { (PI / x).min(top / 16.0) } else { top / 16.0 };
        let count = (top / panel).ceil().max(1.0) as usize;
        let mut breaks: Vec<f64> = (0..=count).map(|k| k as f64 * panel).collect();
        *breaks.last_mut().expect("at least two breaks") = top;
        let tol = cfg.abs_tol * PI;
        let est = match kernel {
            Kernel::Density => quad::integrate_panels(&|t: f64| (t * x).cos() * envelope(t), &breaks, tol, 0.0)?,
            Kernel::Cdf => quad::integrate_panels(
                &|t: f64| {
                    if t == 0.0 {
                        x
                    } else {
                        (t * x).sin() / t * envelope(t)
                    }
                },
                &breaks,
                tol,
                0.0,
            )?,
            Kernel::Derivative => {
                let e = quad::integrate_panels(&|t: f64| t * (t * x).sin() * envelope(t), &breaks, tol, 0.0)?;
                quad::Estimate {
                    value: -e.value,
                    error: e.error,
                }
            }
        };
        Ok(est.value * FRAC_1_PI)
    }

    /// Tail expansion in the standardized variable `y = |x| / gamma`. Returns
    /// the density, survival function or density derivative of the standard
    /// law, or `None` when the series is not reliable at `y`.
    fn tail_series(&self, y: f64, kernel: Kernel, cfg: &StableConfig) -> Option<f64> {
        if self.alpha >= 2.0 || y < cfg.tail_switch {
            return None;
        }
        let a = self.alpha;
        let ly = y.ln();
        let mut sum = 0.0;
        let mut last = f64::INFINITY;
        for k in 1..200 {
            let kf = k as f64;
            let s = (kf * PI * a / 2.0).sin();
            let (lg, power) = match kernel {
                Kernel::Density => (ln_gamma(a * kf + 1.0), -a * kf - 1.0),
                Kernel::Cdf => (ln_gamma(a * kf), -a * kf),
                Kernel::Derivative => (ln_gamma(a * kf + 2.0), -a * kf - 2.0),
            };
            let mag = (lg - ln_gamma(kf + 1.0) + power * ly).exp();
            if mag > last && mag > 1e-300 {
                // asymptotic series started to diverge
                break;
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * s * mag;
            last = mag;
            if mag < 1e-17 * sum.abs() || mag == 0.0 {
                break;
            }
        }
        if last > cfg.abs_tol * 1e-2 {
            return None;
        }
        let v = sum * FRAC_1_PI;
        Some(match kernel {
            Kernel::Derivative => -v,
            _ => v,
        })
    }

    /// Chambers-Mallows-Stuck draw for the symmetric case.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = PI * (rng::open_unit(rng) - 0.5);
        let a = self.alpha;
        let x = if (a - 1.0).abs() < 1e-12 {
            v.tan()
        } else {
            let w: f64 = Exp1.sample(rng);
            (a * v).sin() / v.cos().powf(1.0 / a) * (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a)
        };
        self.gamma * x
    }

    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::InvalidParameter("count must be at least 1".into()));
        }
        let mut r = rng::stream(seed, 0);
        Ok((0..count).map(|_| self.draw(&mut r)).collect())
    }

    /// Upper quartile, found by bisection on the distribution function.
    pub fn upper_quartile(&self) -> Result<f64> {
        let (mut lo, mut hi) = (0.0, self.gamma);
        while self.cdf(hi)? < 0.75 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid)? < 0.75 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Leading-order `P(|Z| > x)`, used to size grids.
    pub fn tail_mass_estimate(&self, x: f64) -> f64 {
        let y = x.abs() / self.gamma;
        if self.alpha >= 2.0 {
            // Gaussian with standard deviation sqrt(2) gamma
            statrs::function::erf::erfc(y / 2.0)
        } else {
            let a = self.alpha;
            2.0 * (ln_gamma(a).exp() * (PI * a / 2.0).sin() / PI) * y.powf(-a)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};

    fn std_normal() -> Normal {
        Normal::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StableLaw::new(0.0, 1.0).is_err());
        assert!(StableLaw::new(2.5, 1.0).is_err());
        assert!(StableLaw::new(1.0, 0.0).is_err());
    }

    #[test]
    fn density_examples() {
        let g = StableLaw::gaussian(1.0).unwrap();
        assert!((g.density(0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-10);
        let c = StableLaw::cauchy(1.0).unwrap();
        assert!((c.density(0.0).unwrap() - FRAC_1_PI).abs() < 1e-10);
        let s = StableLaw::new(1.5, 1.0).unwrap();
        let oracle = crate::special::gamma(1.0 + 1.0 / 1.5) / PI;
        assert!((s.density(0.0).unwrap() - oracle).abs() < 1e-9);
        assert!((oracle - 0.287_353).abs() < 1e-6);
    }

    #[test]
    fn cdf_examples() {
        for &(a, g) in &[(0.7, 2.0), (1.3, 0.5), (2.0, 1.0)] {
            let law = StableLaw::new(a, g).unwrap();
            assert!((law.cdf(0.0).unwrap() - 0.5).abs() < 1e-12);
        }
        let c = StableLaw::cauchy(1.0).unwrap();
        assert!((c.cdf(1.0).unwrap() - 0.75).abs() < 1e-10);
        let g = StableLaw::gaussian(1.0).unwrap();
        assert!((g.cdf(1.959_964).unwrap() - std_normal().cdf(1.959_964)).abs() < 1e-10);
        assert!((g.cdf(1.959_964).unwrap() - 0.975).abs() < 1e-6);
    }

    #[test]
    fn derivative_examples() {
        let g = StableLaw::gaussian(1.0).unwrap();
        assert!(g.density_derivative(0.0).unwrap().abs() < 1e-12);
        assert!((g.density_derivative(1.0).unwrap() + std_normal().pdf(1.0)).abs() < 1e-10);
        let c = StableLaw::cauchy(1.0).unwrap();
        assert!((c.density_derivative(1.0).unwrap() + 1.0 / (2.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn tail_series_matches_quadrature_at_switch() {
        let law = StableLaw::new(1.5, 1.0).unwrap();
        let cfg = StableConfig::default();
        let far = StableConfig {
            tail_switch: 1e9,
            ..cfg
        };
        for &x in &[40.0, 60.0] {
            let a = law.density_with(x, &cfg).unwrap();
            let b = law.density_with(x, &far).unwrap();
            assert!((a - b).abs() < 1e-11, "x={x}: {a} vs {b}");
            let a = law.cdf_with(x, &cfg).unwrap();
            let b = law.cdf_with(x, &far).unwrap();
            assert!((a - b).abs() < 1e-10, "x={x}: {a} vs {b}");
            let a = law.density_derivative_with(x, &cfg).unwrap();
            let b = law.density_derivative_with(x, &far).unwrap();
            assert!((a - b).abs() < 1e-11, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn cauchy_tail_series_is_closed_form() {
        let c = StableLaw::cauchy(2.0).unwrap();
        let x = 500.0;
        let exact = 2.0 / (PI * (4.0 + x * x));
        assert!((c.density(x).unwrap() - exact).abs() < 1e-14);
        let exact_cdf = 0.5 + (x / 2.0f64).atan() / PI;
        assert!((c.cdf(x).unwrap() - exact_cdf).abs() < 1e-13);
    }

    #[test]
    fn sampling_is_deterministic() {
        let law = StableLaw::new(1.2, 1.0).unwrap();
        assert_eq!(law.sample(11, 100).unwrap(), law.sample(11, 100).unwrap());
        assert_ne!(law.sample(11, 100).unwrap(), law.sample(12, 100).unwrap());
        assert!(law.sample(1, 0).is_err());
    }

    #[test]
    fn gaussian_sample_variance() {
        let law = StableLaw::gaussian(1.0).unwrap();
        let xs = law.sample(2024, 1_000_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn cauchy_sample_median_within_dkw_band() {
        let law = StableLaw::cauchy(1.0).unwrap();
        let mut xs = law.sample(5, 1_000_000).unwrap();
        xs.sort_by(f64::total_cmp);
        let median = xs[xs.len() / 2];
        let band = ((2.0f64 / 0.001).ln() / (2.0 * 1e6)).sqrt();
        // |F(median) - 1/2| must lie inside the band
        assert!((law.cdf(median).unwrap() - 0.5).abs() <= band);
    }

    #[test]
    fn quartiles() {
        let c = StableLaw::cauchy(3.0).unwrap();
        assert!((c.upper_quartile().unwrap() - 3.0).abs() < 1e-8);
        let g = StableLaw::gaussian(1.0).unwrap();
        assert!((g.upper_quartile().unwrap() - 0.674_489_750_196_081_7).abs() < 1e-8);
    }
}
