//! Direct simulation of `S_n / a_n` as an independent check on the Fourier
//! pipeline, with Dvoretzky-Kiefer-Wolfowitz confidence bands.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{compute_distribution_scaled, GridSpec};
use crate::rng;
use crate::scaling::ScalingRule;
use crate::summands::Family;

pub const DEFAULT_CONFIDENCE: f64 = 0.999;
pub const MAX_SUMMANDS: u64 = 100_000;
pub const MIN_REPLICATES: usize = 10_000;
/// Tail tolerance of the Fourier grid used for comparison. Far below any
/// DKW band at the allowed replicate counts.
pub const MC_TAIL_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: u64,
    pub m: usize,
    pub seed: u64,
    pub confidence: f64,
}

impl McConfig {
    pub fn new(n: u64, m: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            seed,
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_SUMMANDS {
            return Err(Error::InvalidParameter(format!(
                "n = {} outside 1..={MAX_SUMMANDS}; use the Fourier engine for larger n",
                self.n
            )));
        }
        if self.m < MIN_REPLICATES {
            return Err(Error::InvalidParameter(format!("m = {} below {MIN_REPLICATES}", self.m)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParameter(format!("confidence {} not in (0, 1)", self.confidence)));
        }
        Ok(())
    }

    pub fn dkw_half_width(&self) -> f64 {
        dkw_half_width(self.m, self.confidence)
    }
}

/// `sqrt(log(2 / (1 - confidence)) / (2 m))`.
pub fn dkw_half_width(m: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * m as f64)).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    /// Sorted replicate values.
    pub values: Vec<f64>,
    pub half_width: f64,
}

impl EmpiricalCdf {
    pub fn from_values(mut values: Vec<f64>, confidence: f64) -> Self {
        values.sort_by(f64::total_cmp);
        let half_width = dkw_half_width(values.len(), confidence);
        Self { values, half_width }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// `sup_x |F_emp(x) - f(x)|` for a continuous `f`, checked on both sides
    /// of every jump.
    pub fn kolmogorov_to<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> f64 {
        let m = self.values.len() as f64;
        self.values
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let fx = f(x);
                (fx - i as f64 / m).abs().max(((i + 1) as f64 / m - fx).abs())
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Kolmogorov distance between this sample and its mirror image.
    pub fn mirror_distance(&self) -> f64 {
        let flipped = EmpiricalCdf::from_values(self.values.iter().map(|v| -v).collect(), 0.5);
        let mut d: f64 = 0.0;
        for &x in self.values.iter().chain(&flipped.values) {
            d = d.max((self.eval(x) - flipped.eval(x)).abs());
        }
        d
    }
}

/// `m` replicates of `S_n / a_n`; replicate `i` only depends on `(seed, i)`.
pub fn empirical_scaled_sum_cdf(family: &Family, rule: &ScalingRule, cfg: &McConfig) -> Result<EmpiricalCdf> {
    let a_n = rule.eval_a_n(cfg.n as f64)?;
    empirical_with_scale(family, a_n, cfg)
}

/// `m` replicates of `S_n / a_n` for an explicit `a_n`.
pub fn empirical_with_scale(family: &Family, a_n: f64, cfg: &McConfig) -> Result<EmpiricalCdf> {
    cfg.validate()?;
    let values = (0..cfg.m as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(cfg.seed, i);
            let s: f64 = (0..cfg.n).map(|_| family.draw(&mut r)).sum();
            s / a_n
        })
        .collect();
    Ok(EmpiricalCdf::from_values(values, cfg.confidence))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub n: u64,
    pub m: usize,
    pub seed: u64,
    pub a_n: f64,
    /// Multiplier applied to `a_n` in the simulation (1 unless corrupted on purpose).
    pub scale_factor: f64,
    pub distance: f64,
    pub half_width: f64,
    pub grid_tol: f64,
    pub passed: bool,
}

impl CrossCheck {
    /// Excess over the band in units of the band; above 3 points at a bug
    /// rather than sampling noise.
    pub fn excess_ratio(&self) -> f64 {
        (self.distance - self.half_width - self.grid_tol).max(0.0) / self.half_width
    }
}

/// Empirical CDF of `S_n / a_n` against the Fourier `F_n`.
pub fn crosscheck(family: &Family, rule: &ScalingRule, cfg: &McConfig) -> Result<CrossCheck> {
    crosscheck_scaled(family, rule, cfg, 1.0)
}

/// As [`crosscheck`] with the simulated sums divided by `factor a_n` while
/// the Fourier side keeps `a_n`. Used as a negative control.
pub fn crosscheck_scaled(family: &Family, rule: &ScalingRule, cfg: &McConfig, factor: f64) -> Result<CrossCheck> {
    cfg.validate()?;
    let n = cfg.n as f64;
    let a_n = rule.eval_a_n(n)?;
    let grid = GridSpec::auto_scaled(family, n, a_n, MC_TAIL_TOL)?;
    let dist = compute_distribution_scaled(family, n, a_n, &grid, &format!("{family} {rule}"))?;
    let emp = empirical_with_scale(family, factor * a_n, cfg)?;
    let distance = emp.kolmogorov_to(|x| dist.cdf_interp(x));
    let grid_tol = grid.tail_tol;
    Ok(CrossCheck {
        n: cfg.n,
        m: cfg.m,
        seed: cfg.seed,
        a_n,
        scale_factor: factor,
        distance,
        half_width: emp.half_width,
        grid_tol,
        passed: distance <= emp.half_width + grid_tol,
    })
}
