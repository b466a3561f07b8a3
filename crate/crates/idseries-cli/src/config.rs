//! Run configuration: flag parsing, the flat `key = value` config file,
//! and the precedence rule (defaults, then file values, then flags).

use std::fmt;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand as ClapSubcommand};

use crate::AppError;

/// The seven experiment pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Curves,
    Bounds,
    Simulate,
    Expectation,
    Nemirovski,
    Chance,
    Qopt,
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Subcommand::Curves => "curves",
            Subcommand::Bounds => "bounds",
            Subcommand::Simulate => "simulate",
            Subcommand::Expectation => "expectation",
            Subcommand::Nemirovski => "nemirovski",
            Subcommand::Chance => "chance",
            Subcommand::Qopt => "qopt",
        };
        f.write_str(name)
    }
}

/// Fully resolved settings for one invocation. Paths stay optional here;
/// each subcommand demands the ones it needs at dispatch time.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub model_path: Option<PathBuf>,
    pub series_path: Option<PathBuf>,
    pub problem_path: Option<PathBuf>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub trials: u64,
    pub seed: u64,
    pub c: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub output_path: PathBuf,
}

impl RunConfig {
    fn defaults(subcommand: Subcommand) -> Self {
        RunConfig {
            subcommand,
            model_path: None,
            series_path: None,
            problem_path: None,
            t_min: 0.1,
            t_max: 5.0,
            t_steps: 50,
            trials: 10_000,
            seed: 42,
            c: 6.0,
            delta: 0.05,
            epsilon: 0.25,
            alpha: 1.0,
            output_path: PathBuf::from("out.csv"),
        }
    }

    /// The evaluation grid: `t_steps` equispaced points on [t_min, t_max].
    pub fn t_grid(&self) -> Vec<f64> {
        let span = self.t_max - self.t_min;
        (0..self.t_steps)
            .map(|i| self.t_min + span * i as f64 / (self.t_steps - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<(), AppError> {
        for (name, v) in [
            ("t_min", self.t_min),
            ("t_max", self.t_max),
            ("c", self.c),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("alpha", self.alpha),
        ] {
            if !v.is_finite() {
                return Err(AppError::usage(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.t_min < self.t_max) {
            return Err(AppError::usage(format!("t_min must be below t_max, got {} and {}", self.t_min, self.t_max)));
        }
        if self.t_steps < 2 {
            return Err(AppError::usage(format!("t_steps must be at least 2, got {}", self.t_steps)));
        }
        if self.trials < 1 {
            return Err(AppError::usage("trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Parser)]
#[command(name = "idseries", version, about = "Tail bounds for matrix infinitely divisible series: analytic curves, Monte Carlo validation, and SDP rounding pipelines")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(ClapSubcommand)]
enum Cmd {
    /// Tabulate Q, B, T and the piecewise power bound, with the crossing row
    Curves(CommonOpts),
    /// Tabulate every analytic tail bound over the t grid
    Bounds(CommonOpts),
    /// Compare analytic bounds against Monte Carlo tail estimates
    Simulate(CommonOpts),
    /// Expectation bounds for the series norm next to the empirical mean
    Expectation(CommonOpts),
    /// Spectral-norm threshold parameters for a rectangular series
    Nemirovski(CommonOpts),
    /// Chance-constraint scaling gamma for a linear matrix inequality
    Chance(CommonOpts),
    /// Solve the orthogonality relaxation and round a feasible candidate
    Qopt(CommonOpts),
}

#[derive(Args)]
struct CommonOpts {
    /// Flat `key = value` config file merged beneath the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// I.d. model file: `sigma2 = <real>` and repeated `atom = <u>,<w>` lines
    #[arg(long)]
    model: Option<PathBuf>,
    /// Coefficient series file: a count line, then that many matrix blocks
    #[arg(long)]
    series: Option<PathBuf>,
    /// Problem file (quadratic or chance blocks, per subcommand)
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Left end of the evaluation grid
    #[arg(long = "t-min")]
    t_min: Option<f64>,
    /// Right end of the evaluation grid
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Number of grid points (at least 2)
    #[arg(long = "t-steps")]
    t_steps: Option<usize>,
    /// Monte Carlo trial count
    #[arg(long)]
    trials: Option<u64>,
    /// Seed for all randomized work
    #[arg(long)]
    seed: Option<u64>,
    /// Right endpoint c of the piecewise bound domain
    #[arg(long)]
    c: Option<f64>,
    /// Quantile level for tail inversion
    #[arg(long)]
    delta: Option<f64>,
    /// Chance-constraint violation budget
    #[arg(long)]
    epsilon: Option<f64>,
    /// Guarantee exponent alpha
    #[arg(long)]
    alpha: Option<f64>,
    /// Output CSV path
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parses argv into a validated [`RunConfig`]: clap flags, then the optional
/// config file, with flags overriding file values and file values overriding
/// defaults. Help and version requests come back as exit-0 pseudo-errors
/// carrying the rendered text.
pub fn parse_config(argv: &[String]) -> Result<RunConfig, AppError> {
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            AppError { module: "cli".into(), code: "help".into(), detail: e.render().to_string(), exit: 0 }
        }
        _ => AppError::usage(e.render().to_string()),
    })?;
    let (subcommand, opts) = match cli.cmd {
        Cmd::Curves(o) => (Subcommand::Curves, o),
        Cmd::Bounds(o) => (Subcommand::Bounds, o),
        Cmd::Simulate(o) => (Subcommand::Simulate, o),
        Cmd::Expectation(o) => (Subcommand::Expectation, o),
        Cmd::Nemirovski(o) => (Subcommand::Nemirovski, o),
        Cmd::Chance(o) => (Subcommand::Chance, o),
        Cmd::Qopt(o) => (Subcommand::Qopt, o),
    };

    let mut cfg = RunConfig::defaults(subcommand);
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AppError::missing_input(format!("cannot read config file '{}': {e}", path.display()))
        })?;
        apply_file(&mut cfg, &text, &path.display().to_string())?;
    }
    apply_flags(&mut cfg, &opts);
    cfg.validate()?;
    Ok(cfg)
}

fn apply_flags(cfg: &mut RunConfig, opts: &CommonOpts) {
    if let Some(v) = &opts.model {
        cfg.model_path = Some(v.clone());
    }
    if let Some(v) = &opts.series {
        cfg.series_path = Some(v.clone());
    }
    if let Some(v) = &opts.problem {
        cfg.problem_path = Some(v.clone());
    }
    if let Some(v) = opts.t_min {
        cfg.t_min = v;
    }
    if let Some(v) = opts.t_max {
        cfg.t_max = v;
    }
    if let Some(v) = opts.t_steps {
        cfg.t_steps = v;
    }
    if let Some(v) = opts.trials {
        cfg.trials = v;
    }
    if let Some(v) = opts.seed {
        cfg.seed = v;
    }
    if let Some(v) = opts.c {
        cfg.c = v;
    }
    if let Some(v) = opts.delta {
        cfg.delta = v;
    }
    if let Some(v) = opts.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = opts.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = &opts.output {
        cfg.output_path = v.clone();
    }
}

/// Applies one `key = value` file. Unknown keys are rejected by name so a
/// typo cannot silently fall back to a default.
fn apply_file(cfg: &mut RunConfig, text: &str, name: &str) -> Result<(), AppError> {
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = format!("{name}:{}", idx + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| AppError::parse(format!("expected 'key = value' at {at}, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "model_path" => cfg.model_path = Some(PathBuf::from(value)),
            "series_path" => cfg.series_path = Some(PathBuf::from(value)),
            "problem_path" => cfg.problem_path = Some(PathBuf::from(value)),
            "t_min" => cfg.t_min = parse_num(value, key, &at)?,
            "t_max" => cfg.t_max = parse_num(value, key, &at)?,
            "t_steps" => cfg.t_steps = parse_num(value, key, &at)?,
            "trials" => cfg.trials = parse_num(value, key, &at)?,
            "seed" => cfg.seed = parse_num(value, key, &at)?,
            "c" => cfg.c = parse_num(value, key, &at)?,
            "delta" => cfg.delta = parse_num(value, key, &at)?,
            "epsilon" => cfg.epsilon = parse_num(value, key, &at)?,
            "alpha" => cfg.alpha = parse_num(value, key, &at)?,
            "output_path" => cfg.output_path = PathBuf::from(value),
            other => {
                return Err(AppError::parse(format!("unknown key '{other}' at {at}")));
            }
        }
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str, at: &str) -> Result<T, AppError> {
    value
        .parse()
        .map_err(|_| AppError::parse(format!("cannot parse '{value}' for key '{key}' at {at}")))
}
