//! Law of `S_n / a_n` from the power `phi(t / a_n)^n` of the summand
//! characteristic function, inverted on a uniform grid with one FFT per
//! quantity.
//!
//! With `x_j = -x_max + j dx` and frequencies `t_k = k dt`, `dt = pi / x_max`,
//! the trapezoid sums
//!
//! ```text
//! rho(x_j) = (dt/pi) [ Phi_0 / 2 + sum_k Phi_k cos(t_k x_j) ]
//! F(x_j)   = 1/2 + (dt/pi) [ x_j / 2 + sum_k Phi_k sin(t_k x_j) / t_k ]
//! ```
//!
//! are exact for the `2 x_max`-periodized law once `Phi` has decayed below
//! the envelope tolerance, so the only discretization error is aliasing of
//! the tails, which the tail-mass check bounds.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling::ScalingRule;
use crate::stable::StableLaw;
use crate::summands::Family;

pub const MIN_POINTS: usize = 1 << 14;
pub const DEFAULT_POINTS: usize = 1 << 20;
pub const MAX_POINTS: usize = 1 << 23;
pub const ENVELOPE_TOL: f64 = 1e-14;
pub const RINGING_TOL: f64 = 1e-10;
pub const TAIL_TOL: f64 = 1e-6;
/// Tail tolerance for grids built around a stable law alone.
pub const LAW_TAIL_TOL: f64 = 1e-5;
/// Residual of [`self_convolve_check`] above which a grid is flagged.
pub const SELF_CONVOLVE_TOL: f64 = 1e-7;

/// Fraction of the Nyquist frequency `pi / dx` that `t_max` may use when the
/// grid is sized automatically.
const NYQUIST_FILL: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_max: f64,
    pub points: usize,
    pub t_max: f64,
    pub envelope_tol: f64,
    pub ringing_tol: f64,
    pub tail_tol: f64,
}

impl GridSpec {
    pub fn new(x_max: f64, points: usize, t_max: f64) -> Result<Self> {
        let g = Self {
            x_max,
            points,
            t_max,
            envelope_tol: ENVELOPE_TOL,
            ringing_tol: RINGING_TOL,
            tail_tol: TAIL_TOL,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_tolerances(mut self, envelope_tol: f64, ringing_tol: f64, tail_tol: f64) -> Self {
        self.envelope_tol = envelope_tol;
        self.ringing_tol = ringing_tol;
        self.tail_tol = tail_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max > 0.0 && self.x_max.is_finite() && self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Grid(format!("x_max = {} and t_max = {} must be positive", self.x_max, self.t_max)));
        }
        if !self.points.is_power_of_two() || self.points < MIN_POINTS {
            return Err(Error::Grid(format!("points = {} must be a power of two >= {MIN_POINTS}", self.points)));
        }
        if self.t_max > std::f64::consts::PI / self.dx() {
            return Err(Error::Grid(format!(
                "t_max = {} exceeds the Nyquist frequency {} of the grid",
                self.t_max,
                std::f64::consts::PI / self.dx()
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / self.points as f64
    }

    pub fn dt(&self) -> f64 {
        std::f64::consts::PI / self.x_max
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.x_max + j as f64 * self.dx()
    }

    /// Number of frequency nodes `t_k = k dt`, `k < nodes`, covering `[0, t_max]`.
    pub fn nodes(&self) -> usize {
        (self.t_max / self.dt()).ceil() as usize + 1
    }

    /// Twice the points and twice the frequency cutoff on the same window.
    pub fn refined(&self) -> Self {
        Self {
            points: self.points * 2,
            t_max: self.t_max * 2.0,
            ..self.clone()
        }
    }

    /// Grid for `S_n / a_n` with `a_n = rule(n)`; see [`GridSpec::auto_scaled`].
    pub fn auto(family: &Family, rule: &ScalingRule, n: f64) -> Result<Self> {
        Self::auto_scaled(family, n, rule.eval_a_n(n)?, TAIL_TOL)
    }

    /// Sizes the window to `max(50 IQR, x_tail)`, where the interquartile
    /// range is that of the stable law matching `Phi` at its half-height and
    /// `x_tail` is where the one-sided tail mass estimate drops below
    /// `tail_tol`; `t_max` is where `|Phi|` falls below [`ENVELOPE_TOL`].
    pub fn auto_scaled(family: &Family, n: f64, a_n: f64, tail_tol: f64) -> Result<Self> {
        let sum = SumLaw::new(family, n, a_n)?;
        let alpha = family.tail_index();
        let t_half = bracket_decreasing(|t| sum.ln_abs_cf(t), 0.5f64.ln(), 1.0)?;
        let law = StableLaw::new(alpha, std::f64::consts::LN_2.powf(1.0 / alpha) / t_half)?;
        let iqr = 2.0 * law.upper_quartile()?;
        let tail = |x: f64| 0.5 * law.tail_mass_estimate(x).max(n * family.abs_survival(a_n * x));
        // aim below the tolerance: the runtime check reads the boundary
        // density, which also carries the periodic image
        let x_tail = bracket_decreasing(|x| Ok(tail(x).ln()), (0.25 * tail_tol).ln(), iqr)?;
        let t_env = bracket_decreasing(|t| sum.ln_abs_cf(t), ENVELOPE_TOL.ln(), t_half)?;
        Self::sized(50.0 * iqr, x_tail, t_env, tail_tol)
    }

    /// Grid around a stable law alone, as used for the stability-identity
    /// diagnostic; the cutoff also covers the law rescaled by `2^{-1/alpha}`.
    pub fn for_law(law: &StableLaw) -> Result<Self> {
        let iqr = 2.0 * law.upper_quartile()?;
        let x_tail = bracket_decreasing(|x| Ok((0.5 * law.tail_mass_estimate(x)).ln()), (0.25 * LAW_TAIL_TOL).ln(), iqr)?;
        let gamma = law.gamma * 2f64.powf(-1.0 / law.alpha);
        let t_env = bracket_decreasing(|t| Ok(-(gamma * t).powf(law.alpha)), ENVELOPE_TOL.ln(), 1.0 / gamma)?;
        Self::sized(50.0 * iqr, x_tail, t_env, LAW_TAIL_TOL)
    }

    fn sized(x_spread: f64, x_tail: f64, t_env: f64, tail_tol: f64) -> Result<Self> {
        let x_max = x_spread.max(x_tail);
        // a little headroom so the envelope check over the last nodes passes
        let t_max = 1.05 * t_env;
        let needed = (2.0 * x_max * t_max / (NYQUIST_FILL * std::f64::consts::PI)).ceil() as usize;
        let points = needed.next_power_of_two().max(DEFAULT_POINTS);
        if points > MAX_POINTS {
            return Err(Error::Grid(format!(
                "window {x_max:e} with cutoff {t_max:e} needs {points} points (> {MAX_POINTS}); relax tail_tol"
            )));
        }
        Ok(Self::new(x_max, points, t_max)?.with_tolerances(ENVELOPE_TOL, RINGING_TOL, tail_tol))
    }
}

/// Smallest `x >= start / 2^k` (to 0.1% accuracy) with `f(x) < level` for a
/// function that decreases through `level` once.
fn bracket_decreasing<F: Fn(f64) -> Result<f64>>(f: F, level: f64, start: f64) -> Result<f64> {
    let (mut lo, mut hi) = (start, start);
    if f(start)? < level {
        while f(lo)? < level {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::NonConvergence("bracketing went below 1e-300".into()));
            }
        }
        hi = 2.0 * lo;
    } else {
        while f(hi)? >= level {
            hi *= 2.0;
            if !hi.is_finite() || hi > 1e300 {
                return Err(Error::NonConvergence(format!("no crossing of level {level} found")));
            }
        }
        lo = 0.5 * hi;
    }
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `n log phi(t / a_n) = n log(1 - u)`, `u = 1 - phi(t / a_n)`.
pub fn log_cf_power(family: &Family, a_n: f64, n: f64, t: f64) -> Result<f64> {
    let u = family.one_minus_cf(t / a_n)?;
    if u >= 1.0 {
        return Err(Error::FrequencyOutOfRange { t, u });
    }
    Ok(n * (-u).ln_1p())
}

/// Summand law, count and normalization of one sum.
struct SumLaw<'a> {
    family: &'a Family,
    n: f64,
    a_n: f64,
}

impl<'a> SumLaw<'a> {
    fn new(family: &'a Family, n: f64, a_n: f64) -> Result<Self> {
        if !(n >= 1.0 && n.is_finite()) {
            return Err(Error::InvalidParameter(format!("n = {n} must be >= 1")));
        }
        if !(a_n > 0.0 && a_n.is_finite()) {
            return Err(Error::InvalidParameter(format!("a_n = {a_n} must be positive")));
        }
        Ok(Self { family, n, a_n })
    }

    /// `phi(t / a_n)^n`; where `phi <= 0` only integer `n` is meaningful.
    fn cf(&self, t: f64) -> Result<f64> {
        let u = self.family.one_minus_cf(t / self.a_n)?;
        if u < 1.0 {
            return Ok((self.n * (-u).ln_1p()).exp());
        }
        if self.n.fract() != 0.0 {
            return Err(Error::FrequencyOutOfRange { t, u });
        }
        let magnitude = (self.n * (u - 1.0).ln()).exp();
        let odd = self.n % 2.0 == 1.0;
        Ok(if odd { -magnitude } else { magnitude })
    }

    fn ln_abs_cf(&self, t: f64) -> Result<f64> {
        let u = self.family.one_minus_cf(t / self.a_n)?;
        Ok(self.n * (1.0 - u).abs().ln())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest `|Phi|` over the top 2% of the frequency range.
    pub envelope: f64,
    /// One-sided tail mass beyond `x_max`, estimated from the boundary density.
    pub tail_mass: f64,
    /// Most negative density value before clamping.
    pub min_density: f64,
    pub clamped: usize,
}

/// Density and distribution function of a law sampled on a [`GridSpec`],
/// keeping the frequency samples so values between grid points can be
/// evaluated from the same trapezoid sums.
#[derive(Clone, Debug)]
pub struct SampledDistribution {
    pub grid: GridSpec,
    pub density_values: Vec<f64>,
    pub cdf_values: Vec<f64>,
    pub n: f64,
    pub a_n: f64,
    /// Scaling or law descriptor.
    pub label: String,
    pub diagnostics: Diagnostics,
    cf_nodes: Vec<f64>,
}

impl SampledDistribution {
    pub fn x(&self, j: usize) -> f64 {
        self.grid.x(j)
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.points).map(move |j| self.grid.x(j))
    }

    pub fn cf_nodes(&self) -> &[f64] {
        &self.cf_nodes
    }

    /// Density at any `x`, from the trapezoid sum over the stored nodes.
    pub fn density_at(&self, x: f64) -> f64 {
        let dt = self.grid.dt();
        let mut sum = 0.5 * self.cf_nodes[0];
        for (k, &c) in self.cf_nodes.iter().enumerate().skip(1) {
            sum += c * (k as f64 * dt * x).cos();
        }
        sum * dt / std::f64::consts::PI
    }

    pub fn cdf_at(&self, x: f64) -> f64 {
        if x <= -self.grid.x_max {
            return 0.0;
        }
        if x >= self.grid.x_max {
            return 1.0;
        }
        let dt = self.grid.dt();
        let mut sum = 0.5 * x;
        for (k, &c) in self.cf_nodes.iter().enumerate().skip(1) {
            let t = k as f64 * dt;
            sum += c * (t * x).sin() / t;
        }
        (0.5 + sum * dt / std::f64::consts::PI).clamp(0.0, 1.0)
    }

    pub fn density_derivative_at(&self, x: f64) -> f64 {
        let dt = self.grid.dt();
        let mut sum = 0.0;
        for (k, &c) in self.cf_nodes.iter().enumerate().skip(1) {
            let t = k as f64 * dt;
            sum -= c * t * (t * x).sin();
        }
        sum * dt / std::f64::consts::PI
    }

    /// Cubic Hermite interpolation of the grid CDF with the grid density as slope.
    pub fn cdf_interp(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= -g.x_max {
            return 0.0;
        }
        if x >= g.x_max {
            return 1.0;
        }
        let dx = g.dx();
        let pos = (x + g.x_max) / dx;
        let j = (pos.floor() as usize).min(g.points - 1);
        let s = pos - j as f64;
        let (f0, d0) = (self.cdf_values[j], self.density_values[j]);
        let (f1, d1) = if j + 1 < g.points {
            (self.cdf_values[j + 1], self.density_values[j + 1])
        } else {
            (1.0, self.density_values[0])
        };
        let (s2, s3) = (s * s, s * s * s);
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * f0
            + (s3 - 2.0 * s2 + s) * dx * d0
            + (-2.0 * s3 + 3.0 * s2) * f1
            + (s3 - s2) * dx * d1;
        v.clamp(0.0, 1.0)
    }

    /// `dx * sum_j rho_j` over one period.
    pub fn trapezoid_mass(&self) -> f64 {
        self.grid.dx() * self.density_values.iter().sum::<f64>()
    }

    /// `max_j |rho(x_j) - rho(-x_j)|`.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.grid.points;
        (1..n)
            .map(|j| (self.density_values[j] - self.density_values[n - j]).abs())
            .fold(0.0, f64::max)
    }
}

/// Law of `S_n / a_n` for `a_n = rule(n)` on the given grid.
pub fn compute_distribution(family: &Family, rule: &ScalingRule, n: f64, grid: &GridSpec) -> Result<SampledDistribution> {
    let a_n = rule.eval_a_n(n)?;
    compute_distribution_scaled(family, n, a_n, grid, &rule.to_string())
}

/// Law of `S_n / a_n` for an explicit normalization.
pub fn compute_distribution_scaled(family: &Family, n: f64, a_n: f64, grid: &GridSpec, label: &str) -> Result<SampledDistribution> {
    grid.validate()?;
    let sum = SumLaw::new(family, n, a_n)?;
    let dt = grid.dt();
    let nodes = (0..grid.nodes())
        .into_par_iter()
        .map(|k| sum.cf(k as f64 * dt))
        .collect::<Result<Vec<_>>>()?;
    invert(grid, nodes, family.tail_index(), n, a_n, label.to_string())
}

/// The stable law sampled on the grid by the same inversion.
pub fn sample_law_on_grid(law: &StableLaw, grid: &GridSpec) -> Result<SampledDistribution> {
    grid.validate()?;
    let dt = grid.dt();
    let nodes = (0..grid.nodes()).map(|k| law.char_fn(k as f64 * dt)).collect();
    invert(grid, nodes, law.alpha, 1.0, 1.0, format!("stable:alpha={},gamma={}", law.alpha, law.gamma))
}

fn inverse_fft(len: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_inverse(len)
}

fn invert(grid: &GridSpec, nodes: Vec<f64>, tail_index: f64, n: f64, a_n: f64, label: String) -> Result<SampledDistribution> {
    let points = grid.points;
    let dt = grid.dt();
    let tail_from = (0.98 * nodes.len() as f64) as usize;
    let envelope = nodes[tail_from..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if !(envelope < grid.envelope_tol) {
        return Err(Error::EnvelopeNotDecayed {
            t_max: grid.t_max,
            envelope,
            tolerance: grid.envelope_tol,
        });
    }

    let fft = inverse_fft(points);
    // (-1)^k accounts for the grid starting at -x_max
    let alt = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut dens = vec![Complex64::new(0.0, 0.0); points];
    let mut dist = vec![Complex64::new(0.0, 0.0); points];
    for (k, &c) in nodes.iter().enumerate() {
        let w = if k == 0 { 0.5 } else { 1.0 };
        dens[k] = Complex64::new(w * c * alt(k), 0.0);
        if k > 0 {
            dist[k] = Complex64::new(c * alt(k) / (k as f64 * dt), 0.0);
        }
    }
    fft.process(&mut dens);
    fft.process(&mut dist);

    let scale = dt / std::f64::consts::PI;
    let mut density_values: Vec<f64> = dens.iter().map(|z| z.re * scale).collect();
    let min_density = density_values.iter().copied().fold(f64::INFINITY, f64::min);
    if min_density < -grid.ringing_tol {
        return Err(Error::Ringing(min_density));
    }
    let mut clamped = 0;
    for v in density_values.iter_mut().filter(|v| **v < 0.0) {
        *v = 0.0;
        clamped += 1;
    }
    let mut running = 0.0f64;
    let cdf_values: Vec<f64> = dist
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let v = (0.5 + scale * (0.5 * grid.x(j) + z.im)).clamp(0.0, 1.0);
            running = running.max(v);
            running
        })
        .collect();

    // a power tail rho ~ c x^{-a-1} carries mass rho(x) x / a beyond x; the
    // boundary sample holds both periodic images
    let tail_mass = 0.5 * density_values[0] * grid.x_max / tail_index;
    if tail_mass > grid.tail_tol {
        return Err(Error::TailMass {
            x_max: grid.x_max,
            mass: tail_mass,
            tolerance: grid.tail_tol,
        });
    }

    Ok(SampledDistribution {
        grid: grid.clone(),
        density_values,
        cdf_values,
        n,
        a_n,
        label,
        diagnostics: Diagnostics {
            envelope,
            tail_mass,
            min_density,
            clamped,
        },
        cf_nodes: nodes,
    })
}

/// Sup-norm residual of `rho = tau rho * tau rho` with `tau` the scaling by
/// `2^{-1/alpha}`, both densities sampled on the grid of `dist` and convolved
/// linearly, compared over the central half of the window. Returns infinity
/// when the law cannot be sampled on the grid at all.
pub fn self_convolve_check(dist: &SampledDistribution, law: &StableLaw) -> f64 {
    self_convolve_on(&dist.grid, law).unwrap_or(f64::INFINITY)
}

pub fn self_convolve_on(grid: &GridSpec, law: &StableLaw) -> Result<f64> {
    let rho = sample_law_on_grid(law, grid)?;
    let shrunk = StableLaw::new(law.alpha, law.gamma * 2f64.powf(-1.0 / law.alpha))?;
    let half = sample_law_on_grid(&shrunk, grid)?;

    let points = grid.points;
    let len = 2 * points;
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(len);
    let backward = planner.plan_fft_inverse(len);
    let mut buf: Vec<Complex64> = half
        .density_values
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat_n(Complex64::new(0.0, 0.0), points))
        .collect();
    forward.process(&mut buf);
    for z in buf.iter_mut() {
        *z = *z * *z;
    }
    backward.process(&mut buf);
    // linear index m sits at -2 x_max + m dx, i.e. grid index m - points/2
    let norm = grid.dx() / len as f64;
    let quarter = points / 4;
    Ok((quarter..points - quarter)
        .map(|j| (buf[j + points / 2].re * norm - rho.density_values[j]).abs())
        .fold(0.0, f64::max))
}
