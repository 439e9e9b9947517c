//! Command-line front end. Every command writes a table: `#` comment lines
//! with the configuration, then CSV (or JSON lines with `--json`).
//!
//! Exit codes: 0 success, 1 numerical failure or violated check (with a JSON
//! error record on stderr), 2 bad command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{self, HarnessConfig, DEFAULT_C, DEFAULT_THRESHOLD};
use crate::montecarlo::{self, McConfig, DEFAULT_CONFIDENCE};
use crate::scaling::{proposition_divergence, ScalingRule};
use crate::stable::StableLaw;
use crate::summands::Family;

#[derive(Parser, Debug)]
#[command(name = "slowclt", version, about = "Slow convergence of normalized heavy-tailed sums to stable limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density, CDF and optionally the density derivative of a symmetric stable law.
    StableEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        deriv: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Distances to the limit and bound right-hand sides over log-spaced n.
    Sweep {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        n_min: f64,
        #[arg(long)]
        n_max: f64,
        #[arg(long, default_value_t = 1)]
        per_decade: u32,
        #[arg(long = "C", default_value_t = DEFAULT_C)]
        c: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Checks one of the two lower bounds at each n; exit 1 on a violation.
    BoundCheck {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        theorem: u8,
        #[command(flatten)]
        model: Model,
        #[arg(long = "C", default_value_t = DEFAULT_C)]
        c: f64,
        /// Comma-separated, ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = harness::DEFAULT_MARGIN_TOL)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// `(log n_k)^{1+eps} |1 - L(n_k)/L(2 n_k)|` along `n_k = 2^k`.
    PropCheck {
        #[arg(long)]
        scaling: String,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        kmax: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Cubic-tail sums under the implicit and the natural scaling.
    Dichotomy {
        #[arg(long = "A")]
        a: f64,
        #[arg(long, default_value_t = 1e4)]
        n_min: f64,
        #[arg(long, default_value_t = 1e12)]
        n_max: f64,
        #[arg(long, default_value_t = 1)]
        per_decade: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Simulated sums against the Fourier CDF; exit 1 outside the DKW band.
    McCheck {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
        confidence: f64,
        /// Divide the simulated sums by this multiple of a_n (negative control).
        #[arg(long, default_value_t = 1.0)]
        scale_factor: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
struct Model {
    /// e.g. cubic:A=1, pareto:alpha=1, paretolog:alpha=1.5,beta=1
    #[arg(long)]
    family: String,
    /// const, powerlog:r=<r>, loglog, kk or natural
    #[arg(long)]
    scaling: String,
}

impl Model {
    fn resolve(&self) -> Result<(Family, ScalingRule)> {
        let family: Family = self.family.parse()?;
        let rule = ScalingRule::parse(&self.scaling, family.tail_index().min(2.0))?;
        Ok((family, rule))
    }
}

#[derive(Args, Debug)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON lines instead of CSV.
    #[arg(long)]
    json: bool,
}

/// A table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

/// 17 significant digits, identical on every run.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => fmt_num(*v),
            Cell::Num(_) => "null".into(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => serde_json::Value::String(s.clone()).to_string(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.header.push((key.into(), value.to_string()));
        self
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(s, "{}", row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
        }
        s
    }

    /// First line carries the header as `{"config": {...}}`, then one
    /// object per row with keys in column order.
    pub fn to_jsonl(&self) -> String {
        let obj = |pairs: Vec<(String, String)>| {
            let body: Vec<String> = pairs
                .into_iter()
                .map(|(k, v)| format!("{}:{v}", serde_json::Value::String(k)))
                .collect();
            format!("{{{}}}", body.join(","))
        };
        let mut s = String::new();
        let config = obj(self
            .header
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()).to_string()))
            .collect());
        let _ = writeln!(s, "{{\"config\":{config}}}");
        for row in &self.rows {
            let _ = writeln!(s, "{}", obj(self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect()));
        }
        s
    }
}

/// Outcome of a command: a table, plus a failure to report after writing it.
struct Outcome {
    table: Table,
    failure: Option<(String, String)>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, failure: None }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Domain(_) => "domain",
        Error::Quadrature { .. } => "quadrature",
        Error::NoRoot(_) => "no_root",
        Error::NonConvergence(_) => "non_convergence",
        Error::FrequencyOutOfRange { .. } => "frequency_out_of_range",
        Error::EnvelopeNotDecayed { .. } => "envelope_not_decayed",
        Error::TailMass { .. } => "tail_mass",
        Error::Grid(_) => "grid",
        Error::Ringing(_) => "ringing",
        Error::CalibrationMissing(_) => "calibration_missing",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
    }
}

fn error_record(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (result, out) = dispatch(cli.command);
    match result {
        Ok(outcome) => {
            let text = if out.json {
                outcome.table.to_jsonl()
            } else {
                outcome.table.to_csv()
            };
            if let Err(e) = emit(&text, out.out.as_ref()) {
                eprintln!("{}", error_record("io", &e.to_string()));
                return 1;
            }
            match outcome.failure {
                Some((kind, msg)) => {
                    eprintln!("{}", error_record(&kind, &msg));
                    1
                }
                None => 0,
            }
        }
        Err(e @ Error::Parse(_)) => {
            eprintln!("{}", error_record(error_kind(&e), &e.to_string()));
            2
        }
        Err(e) => {
            eprintln!("{}", error_record(error_kind(&e), &e.to_string()));
            1
        }
    }
}

fn emit(text: &str, path: Option<&PathBuf>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn dispatch(cmd: Command) -> (Result<Outcome>, Output) {
    match cmd {
        Command::StableEval {
            alpha,
            gamma,
            x,
            deriv,
            out,
        } => (stable_eval(alpha, gamma, x, deriv).map(Outcome::from), out),
        Command::Sweep {
            model,
            n_min,
            n_max,
            per_decade,
            c,
            out,
        } => (sweep(&model, n_min, n_max, per_decade, c).map(Outcome::from), out),
        Command::BoundCheck {
            theorem,
            model,
            c,
            n_list,
            threshold,
            tol,
            out,
        } => (bound_check(theorem, &model, c, &n_list, threshold, tol), out),
        Command::PropCheck {
            scaling,
            alpha,
            eps,
            kmax,
            out,
        } => (prop_check(&scaling, alpha, eps, kmax).map(Outcome::from), out),
        Command::Dichotomy {
            a,
            n_min,
            n_max,
            per_decade,
            out,
        } => (dichotomy(a, n_min, n_max, per_decade).map(Outcome::from), out),
        Command::McCheck {
            model,
            n,
            m,
            seed,
            confidence,
            scale_factor,
            out,
        } => {
            let cfg = McConfig { n, m, seed, confidence };
            (mc_check(&model, &cfg, scale_factor), out)
        }
    }
}

fn version_header(t: &mut Table, command: &str) {
    t.meta("slowclt", env!("CARGO_PKG_VERSION")).meta("command", command);
}

fn stable_eval(alpha: f64, gamma: f64, x: f64, deriv: bool) -> Result<Table> {
    let law = StableLaw::new(alpha, gamma)?;
    let mut cols = vec!["x", "density", "cdf"];
    if deriv {
        cols.push("density_derivative");
    }
    let mut t = Table::new(&cols);
    version_header(&mut t, "stable-eval");
    t.meta("alpha", fmt_num(alpha)).meta("gamma", fmt_num(gamma));
    let mut row = vec![Cell::Num(x), Cell::Num(law.density(x)?), Cell::Num(law.cdf(x)?)];
    if deriv {
        row.push(Cell::Num(law.density_derivative(x)?));
    }
    t.rows.push(row);
    Ok(t)
}

/// `n_min, ..., n_max` with `per_decade` points per factor of ten.
pub fn log_spaced(n_min: f64, n_max: f64, per_decade: u32) -> Result<Vec<f64>> {
    if !(n_min > 1.0 && n_max >= n_min && n_max.is_finite()) || per_decade == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 1 < n_min <= n_max and per_decade >= 1, got {n_min}, {n_max}, {per_decade}"
        )));
    }
    let (lo, hi) = (n_min.log10(), n_max.log10());
    let steps = ((hi - lo) * per_decade as f64 + 1e-9).floor() as u32;
    Ok((0..=steps)
        .map(|k| {
            let e = lo + k as f64 / per_decade as f64;
            // exact powers of ten where possible
            if (e - e.round()).abs() < 1e-9 {
                format!("1e{}", e.round() as i64).parse().expect("decimal power")
            } else {
                10f64.powf(e)
            }
        })
        .collect())
}

fn model_header(t: &mut Table, family: &Family, rule: &ScalingRule, law: &StableLaw) {
    t.meta("family", family)
        .meta("scaling", rule)
        .meta("alpha", fmt_num(law.alpha))
        .meta("gamma", fmt_num(law.gamma));
}

fn sweep(model: &Model, n_min: f64, n_max: f64, per_decade: u32, c: f64) -> Result<Table> {
    let (family, rule) = model.resolve()?;
    let cfg = HarnessConfig { c, ..Default::default() };
    let law = harness::limit_law(&family, &rule, &cfg)?;
    let ns = log_spaced(n_min, n_max, per_decade)?;
    let records = harness::sweep(&family, &rule, &ns, &law, &cfg)?;
    let mut cols: Vec<&str> = harness::ConvergenceRecord::COLUMNS.to_vec();
    cols.extend(["family", "scaling", "gamma"]);
    let mut t = Table::new(&cols);
    version_header(&mut t, "sweep");
    model_header(&mut t, &family, &rule, &law);
    t.meta("C", fmt_num(c))
        .meta("n_min", fmt_num(n_min))
        .meta("n_max", fmt_num(n_max))
        .meta("per_decade", per_decade);
    for r in &records {
        let mut row: Vec<Cell> = r.values().iter().map(|&v| Cell::Num(v)).collect();
        row[10] = Cell::Int(r.grid_points as u64);
        row.extend([
            Cell::Text(family.to_string()),
            Cell::Text(rule.to_string()),
            Cell::Num(law.gamma),
        ]);
        t.rows.push(row);
    }
    Ok(t)
}

fn bound_check(theorem: u8, model: &Model, c: f64, n_list: &[f64], threshold: f64, tol: f64) -> Result<Outcome> {
    let (family, rule) = model.resolve()?;
    let cfg = HarnessConfig {
        c,
        threshold_n: threshold,
        margin_tol: tol,
        ..Default::default()
    };
    let v = harness::verify_bounds(&family, &rule, n_list, &cfg)?;
    let checks = if theorem == 1 { &v.theorem1 } else { &v.theorem2 };
    let mut t = Table::new(&["n", "lhs", "rhs", "z_star", "C_used", "margin", "asserted"]);
    version_header(&mut t, "bound-check");
    model_header(&mut t, &family, &rule, &v.law);
    t.meta("theorem", theorem)
        .meta("C", fmt_num(c))
        .meta("threshold_n", fmt_num(threshold))
        .meta("margin_tol", fmt_num(tol));
    for b in checks {
        t.rows.push(vec![
            b.n.into(),
            b.lhs.into(),
            b.rhs.into(),
            b.z_star.into(),
            b.c_used.into(),
            b.margin.into(),
            Cell::Bool(b.asserted),
        ]);
    }
    let violated: Vec<f64> = checks.iter().filter(|b| b.violated(tol)).map(|b| b.n).collect();
    let failure = (!violated.is_empty()).then(|| {
        (
            "margin_violation".to_string(),
            format!("bound {theorem} violated beyond {tol:e} at n = {violated:?}"),
        )
    });
    Ok(Outcome { table: t, failure })
}

fn prop_check(scaling: &str, alpha: f64, eps: f64, kmax: u64) -> Result<Table> {
    let rule = ScalingRule::parse(scaling, alpha)?;
    let seq = proposition_divergence(&rule, eps, kmax)?;
    let mut t = Table::new(&["k", "value", "running_max"]);
    version_header(&mut t, "prop-check");
    t.meta("scaling", &rule)
        .meta("alpha", fmt_num(alpha))
        .meta("eps", fmt_num(eps))
        .meta("kmax", kmax);
    for (i, (v, m)) in seq.values.iter().zip(seq.running_max()).enumerate() {
        t.rows.push(vec![Cell::Int(seq.k_start + i as u64), Cell::Num(*v), Cell::Num(m)]);
    }
    Ok(t)
}

fn dichotomy(a: f64, n_min: f64, n_max: f64, per_decade: u32) -> Result<Table> {
    let ns = log_spaced(n_min, n_max, per_decade)?;
    let d = harness::example_rate_dichotomy(a, &ns)?;
    let mut t = Table::new(&["n", "kk_sup_density", "natural_sup_density", "kk_normalized", "natural_normalized"]);
    version_header(&mut t, "dichotomy");
    let (lo, hi) = d.natural_band();
    t.meta("family", format!("cubic:A={a}"))
        .meta("limit", format!("gaussian variance {}", fmt_num(a)))
        .meta("kk_c_hat", fmt_num(d.kk.c_hat))
        .meta("kk_residual", fmt_num(d.kk.residual))
        .meta("kk_variation_last_4_decades", fmt_num(d.kk_variation(4.0)))
        .meta("natural_c_hat", fmt_num(d.natural.c_hat))
        .meta("natural_residual", fmt_num(d.natural.residual))
        .meta("natural_band", format!("{} {}", fmt_num(lo), fmt_num(hi)))
        .meta("natural_worse_from_1e6", d.natural_worse_from(1e6));
    for ((x, k), n) in d.distances.iter().zip(&d.kk.normalized).zip(&d.natural.normalized) {
        t.rows.push(vec![x.0.into(), x.1.into(), x.2.into(), k.1.into(), n.1.into()]);
    }
    Ok(t)
}

fn mc_check(model: &Model, cfg: &McConfig, factor: f64) -> Result<Outcome> {
    let (family, rule) = model.resolve()?;
    let r = montecarlo::crosscheck_scaled(&family, &rule, cfg, factor)?;
    let mut t = Table::new(&["n", "m", "seed", "a_n", "scale_factor", "distance", "half_width", "grid_tol", "excess_ratio", "passed"]);
    version_header(&mut t, "mc-check");
    t.meta("family", family)
        .meta("scaling", &rule)
        .meta("confidence", fmt_num(cfg.confidence));
    t.rows.push(vec![
        Cell::Int(r.n),
        Cell::Int(r.m as u64),
        Cell::Int(r.seed),
        r.a_n.into(),
        r.scale_factor.into(),
        r.distance.into(),
        r.half_width.into(),
        r.grid_tol.into(),
        r.excess_ratio().into(),
        Cell::Bool(r.passed),
    ]);
    let failure = (!r.passed).then(|| {
        (
            "dkw_band_exceeded".to_string(),
            format!(
                "distance {:e} exceeds band {:e} + grid tolerance {:e}",
                r.distance, r.half_width, r.grid_tol
            ),
        )
    });
    Ok(Outcome { table: t, failure })
}
