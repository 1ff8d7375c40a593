//! Command-line front end for the banddecay library: reproducible CSV runs
//! of the survival-amplitude machinery plus validation workflows.
//!
//! Configuration comes from defaults, then an optional flat key=value file
//! (`--config`), then explicit flags — later layers override earlier ones.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical
//! non-convergence, 4 validation failure (a FAIL verdict in compare-oracle
//! or chain-crosscheck).
//!
//! Output routing: CSV payloads go to `--out` when given, otherwise to
//! standard output. Verdict lines (PASS/FAIL) and warnings go to standard
//! output; informational progress notes go to standard error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use banddecay::{
    chain_closed_form, find_real_poles, short_time_check, spectral_density, survival_amplitude,
    survival_series, tail_exponent, BandKind, BandModel, Error, OracleSystem, SystemParams,
};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Survival series CSV: t, re_g, im_g, p, p_fgr.
    Series,
    /// Bound-pole table with residuals.
    Poles,
    /// Spectral decomposition CSV: discrete weights plus continuum density.
    Spectral,
    /// Power-law fit of the pole-subtracted long-time envelope.
    Tail,
    /// Quadratic-onset fit of 1 - p(t) at early times.
    ShortTime,
    /// Survival series against the discretized-band oracle, with verdict.
    CompareOracle,
    /// Semicircle closed form against the spectral route, with verdict.
    ChainCrosscheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    /// Flat coupling density Δ₀ across the band.
    Constant,
    /// Semicircular density Δ₀ √(1-E²)·... of the half-infinite chain.
    Chain,
    /// Power-law band edges (E - E_b)^{β_b} (E_t - E)^{β_t}.
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TimeUnits {
    /// Band (natural) units.
    Natural,
    /// Units of the golden-rule lifetime τ = 1/(2πΔ(ε)).
    Tau,
}

/// Survival-amplitude runs for a discrete level coupled to a finite band.
#[derive(Debug, Parser)]
#[command(name = "banddecay", version, disable_help_subcommand = true)]
struct Cli {
    /// Flat key=value configuration file applied before other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// What to compute.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Coupling-density profile.
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Peak coupling density Δ₀.
    #[arg(long, allow_negative_numbers = true)]
    delta0: Option<f64>,
    /// Discrete-level energy ε.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// First grid time (window start for tail mode).
    #[arg(long, allow_negative_numbers = true)]
    tmin: Option<f64>,
    /// Last grid time (window end for tail mode).
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    tcount: Option<usize>,
    /// Units of tmin/tmax and of the CSV time column.
    #[arg(long, value_enum)]
    time_units: Option<TimeUnits>,
    /// Number of sampled band levels for compare-oracle.
    #[arg(long)]
    oracle_n: Option<usize>,
    /// CSV output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verdict tolerance for the validation modes.
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
}

/// Fully resolved run configuration (defaults ← config file ← flags).
#[derive(Debug, Clone)]
struct RunConfig {
    mode: Mode,
    model: ModelKind,
    delta0: f64,
    epsilon: f64,
    beta_bottom: f64,
    beta_top: f64,
    tmin: f64,
    tmax: f64,
    tcount: usize,
    time_units: TimeUnits,
    oracle_n: usize,
    out: Option<PathBuf>,
    tol: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Series,
            model: ModelKind::Constant,
            delta0: 0.1,
            epsilon: -0.4,
            beta_bottom: 0.5,
            beta_top: 0.5,
            tmin: 0.0,
            tmax: 10.0,
            tcount: 201,
            time_units: TimeUnits::Natural,
            oracle_n: 250,
            out: None,
            tol: None,
        }
    }
}

/// A run failure carrying its process exit code.
enum Failure {
    Config(String),
    Numeric(String),
    Validation(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Validation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numeric(m) | Failure::Validation(m) => m,
        }
    }
}

/// Library errors split by whether the configuration asked for something
/// undefined (2) or the numerics failed to deliver it (3).
fn map_error(e: Error) -> Failure {
    match e {
        Error::DegenerateInput { .. } | Error::UnsupportedModel { .. } | Error::DecoupledLevel => {
            Failure::Config(e.to_string())
        }
        Error::NoConvergence { .. }
        | Error::NoSignChange { .. }
        | Error::NonFinite { .. }
        | Error::OnCut { .. }
        | Error::DegenerateNodes { .. } => Failure::Numeric(e.to_string()),
    }
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn parse_value_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, Failure> {
    T::from_str(value, true)
        .map_err(|_| config_err(format!("invalid value '{value}' for config key '{key}'")))
}

fn parse_f64(key: &str, value: &str) -> Result<f64, Failure> {
    value
        .parse::<f64>()
        .map_err(|_| config_err(format!("config key '{key}' needs a number, got '{value}'")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, Failure> {
    value
        .parse::<usize>()
        .map_err(|_| config_err(format!("config key '{key}' needs a count, got '{value}'")))
}

/// Applies a flat key=value file ('#' starts a comment line) on top of the
/// current configuration. Unknown keys are configuration errors.
fn apply_config_file(path: &PathBuf, cfg: &mut RunConfig) -> Result<(), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read config file {}: {e}", path.display())))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            config_err(format!("config line {} is not key=value: '{raw}'", idx + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "mode" => cfg.mode = parse_value_enum(key, value)?,
            "model" => cfg.model = parse_value_enum(key, value)?,
            "delta0" => cfg.delta0 = parse_f64(key, value)?,
            "epsilon" => cfg.epsilon = parse_f64(key, value)?,
            "beta_bottom" => cfg.beta_bottom = parse_f64(key, value)?,
            "beta_top" => cfg.beta_top = parse_f64(key, value)?,
            "tmin" => cfg.tmin = parse_f64(key, value)?,
            "tmax" => cfg.tmax = parse_f64(key, value)?,
            "tcount" => cfg.tcount = parse_usize(key, value)?,
            "time_units" => cfg.time_units = parse_value_enum(key, value)?,
            "oracle_n" => cfg.oracle_n = parse_usize(key, value)?,
            "out" => cfg.out = Some(PathBuf::from(value)),
            "tol" => cfg.tol = Some(parse_f64(key, value)?),
            _ => return Err(config_err(format!("unknown config key '{key}'"))),
        }
    }
    Ok(())
}

fn resolve_config(cli: Cli) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        apply_config_file(path, &mut cfg)?;
    }
    if let Some(v) = cli.mode {
        cfg.mode = v;
    }
    if let Some(v) = cli.model {
        cfg.model = v;
    }
    if let Some(v) = cli.delta0 {
        cfg.delta0 = v;
    }
    if let Some(v) = cli.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = cli.tmin {
        cfg.tmin = v;
    }
    if let Some(v) = cli.tmax {
        cfg.tmax = v;
    }
    if let Some(v) = cli.tcount {
        cfg.tcount = v;
    }
    if let Some(v) = cli.time_units {
        cfg.time_units = v;
    }
    if let Some(v) = cli.oracle_n {
        cfg.oracle_n = v;
    }
    if let Some(v) = cli.out {
        cfg.out = Some(v);
    }
    if let Some(v) = cli.tol {
        cfg.tol = Some(v);
    }

    if !(cfg.tmin >= 0.0) {
        return Err(config_err(format!("tmin must be >= 0, got {}", cfg.tmin)));
    }
    if cfg.tcount < 1 {
        return Err(config_err("tcount must be at least 1"));
    }
    if !(cfg.tmax >= cfg.tmin) {
        return Err(config_err(format!(
            "tmax must be >= tmin, got [{}, {}]",
            cfg.tmin, cfg.tmax
        )));
    }
    if cfg.mode == Mode::CompareOracle && cfg.oracle_n < 16 {
        return Err(config_err(format!(
            "compare-oracle needs oracle_n >= 16, got {}",
            cfg.oracle_n
        )));
    }
    if let Some(tol) = cfg.tol {
        if !(tol > 0.0) {
            return Err(config_err(format!("tol must be > 0, got {tol}")));
        }
    }
    Ok(cfg)
}

fn build_model(cfg: &RunConfig) -> Result<BandModel, Failure> {
    match cfg.model {
        ModelKind::Constant => BandModel::constant(cfg.delta0),
        ModelKind::Chain => BandModel::chain(cfg.delta0),
        ModelKind::PowerLaw => BandModel::power_law(cfg.delta0, cfg.beta_bottom, cfg.beta_top),
    }
    .map_err(map_error)
}

/// Time grid in the requested display units plus the natural-unit scale
/// factor (τ for tau units, 1 otherwise).
fn time_grid(cfg: &RunConfig, model: &BandModel) -> Result<(Vec<f64>, f64), Failure> {
    let scale = match cfg.time_units {
        TimeUnits::Natural => 1.0,
        TimeUnits::Tau => {
            let rate = model.fgr_rate(cfg.epsilon);
            if rate <= 0.0 {
                return Err(config_err(
                    "tau time units need a finite golden-rule lifetime, but the coupling \
                     density vanishes at the level energy",
                ));
            }
            1.0 / rate
        }
    };
    let n = cfg.tcount;
    let grid = if n == 1 {
        vec![cfg.tmin]
    } else {
        (0..n)
            .map(|k| cfg.tmin + (cfg.tmax - cfg.tmin) * k as f64 / (n - 1) as f64)
            .collect()
    };
    Ok((grid, scale))
}

/// Formats a value in fixed 17-significant-digit scientific notation,
/// normalizing negative zero so identical values print identically.
fn sci(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Sends a CSV payload to the output path, or to standard output when no
/// path is configured.
fn emit_csv(cfg: &RunConfig, payload: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => fs::write(path, payload).map_err(|e| {
            Failure::Config(format!("cannot write output file {}: {e}", path.display()))
        }),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn note(line: &str) {
    eprintln!("{line}");
}

fn run_series(cfg: &RunConfig, model: &BandModel, params: &SystemParams) -> Result<(), Failure> {
    let (display, scale) = time_grid(cfg, model)?;
    let natural: Vec<f64> = display.iter().map(|t| t * scale).collect();
    let series = survival_series(model, params, &natural).map_err(map_error)?;
    let mut csv = String::from("t,re_g,im_g,p,p_fgr\n");
    for (k, &t) in display.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            sci(t),
            sci(series.g[k].re),
            sci(series.g[k].im),
            sci(series.p[k]),
            sci(series.p_fgr[k])
        ));
    }
    emit_csv(cfg, &csv)?;
    note(&format!(
        "series: {} rows over t ∈ [{}, {}] ({} units)",
        display.len(),
        sci(cfg.tmin),
        sci(if display.len() == 1 { cfg.tmin } else { cfg.tmax }),
        match cfg.time_units {
            TimeUnits::Natural => "natural",
            TimeUnits::Tau => "tau",
        }
    ));
    Ok(())
}

fn run_poles(model: &BandModel, params: &SystemParams) -> Result<(), Failure> {
    let poles = find_real_poles(model, params).map_err(map_error)?;
    println!("bound poles: {}", poles.len());
    println!("E,w,side,residual");
    for p in &poles {
        let side = match p.side {
            banddecay::Side::BelowBand => "below",
            banddecay::Side::AboveBand => "above",
        };
        // The locator residual E - ε - Σ′(E) is meaningless once the pole
        // has rounded onto the band edge itself.
        let residual = if p.near_edge {
            "edge-pinned".to_string()
        } else {
            match model.sigma_prime(p.energy, params) {
                Ok(s) => sci((p.energy - params.epsilon - s).abs()),
                Err(_) => "edge-pinned".to_string(),
            }
        };
        println!("{},{},{side},{residual}", sci(p.energy), sci(p.weight));
    }
    Ok(())
}

fn run_spectral(cfg: &RunConfig, model: &BandModel, params: &SystemParams) -> Result<(), Failure> {
    let sd = spectral_density(model, params).map_err(map_error)?;
    let mut csv = String::from("kind,omega,value\n");
    for (e, w) in &sd.discrete {
        csv.push_str(&format!("discrete,{},{}\n", sci(*e), sci(*w)));
    }
    let n = cfg.tcount.max(2);
    for k in 0..n {
        let omega =
            model.e_bottom + (model.e_top - model.e_bottom) * k as f64 / (n - 1) as f64;
        let a = sd.continuum(omega).map_err(map_error)?;
        csv.push_str(&format!("continuum,{},{}\n", sci(omega), sci(a)));
    }
    emit_csv(cfg, &csv)?;
    note(&format!(
        "spectral: {} discrete weights, {n} continuum samples",
        sd.discrete.len()
    ));
    Ok(())
}

fn run_tail(cfg: &RunConfig, model: &BandModel, params: &SystemParams) -> Result<(), Failure> {
    let (_, scale) = time_grid(cfg, model)?;
    let window = (cfg.tmin * scale, cfg.tmax * scale);
    let fit = tail_exponent(model, params, window).map_err(map_error)?;
    println!(
        "tail fit over t ∈ [{}, {}] (natural units):",
        sci(window.0),
        sci(window.1)
    );
    println!("slope = {}", sci(fit.slope));
    println!("intercept = {}", sci(fit.intercept));
    println!("ln-residual rms = {}", sci(fit.residual_rms));
    Ok(())
}

fn run_short_time(model: &BandModel, params: &SystemParams) -> Result<(), Failure> {
    let q = short_time_check(model, params).map_err(map_error)?;
    println!("quadratic onset over t ∈ (0, 0.1]:");
    println!("coefficient = {}", sci(q.coefficient));
    println!("max relative deviation = {}", sci(q.max_rel_deviation));
    Ok(())
}

fn run_compare_oracle(
    cfg: &RunConfig,
    model: &BandModel,
    params: &SystemParams,
) -> Result<(), Failure> {
    let (display, scale) = time_grid(cfg, model)?;
    let natural: Vec<f64> = display.iter().map(|t| t * scale).collect();
    let sys = OracleSystem::discretize(model, params, cfg.oracle_n)
        .map_err(map_error)?
        .eigensolve()
        .map_err(map_error)?;
    let horizon = sys.revival_time();
    if natural.iter().copied().fold(0.0_f64, f64::max) > horizon {
        println!(
            "warning: grid extends beyond the discretization trust horizon t = {} \
             (natural units); deviations there reflect the finite sample",
            sci(horizon)
        );
    }
    let oracle = sys.evolve(&natural).map_err(map_error)?;
    let direct = survival_series(model, params, &natural).map_err(map_error)?;
    let mut csv = String::from("t,abs_dg\n");
    let mut max_dev = 0.0_f64;
    for (k, &t) in display.iter().enumerate() {
        let dev = (oracle.g[k] - direct.g[k]).norm();
        max_dev = max_dev.max(dev);
        csv.push_str(&format!("{},{}\n", sci(t), sci(dev)));
    }
    emit_csv(cfg, &csv)?;
    let tol = cfg.tol.unwrap_or(1e-4);
    if max_dev <= tol {
        println!(
            "compare-oracle: PASS (max |Δg| = {} <= {} at n = {})",
            sci(max_dev),
            sci(tol),
            cfg.oracle_n
        );
        Ok(())
    } else {
        println!(
            "compare-oracle: FAIL (max |Δg| = {} > {} at n = {})",
            sci(max_dev),
            sci(tol),
            cfg.oracle_n
        );
        Err(Failure::Validation(format!(
            "oracle comparison failed: max |Δg| = {} exceeds {}",
            sci(max_dev),
            sci(tol)
        )))
    }
}

fn run_chain_crosscheck(
    cfg: &RunConfig,
    model: &BandModel,
    params: &SystemParams,
) -> Result<(), Failure> {
    if model.kind != BandKind::SemiInfiniteChain {
        return Err(config_err(
            "chain-crosscheck needs model = chain (the closed form exists only there)",
        ));
    }
    if cfg.epsilon != 0.0 {
        return Err(config_err(
            "chain-crosscheck needs epsilon = 0 (the closed form assumes a centered level)",
        ));
    }
    let (display, scale) = time_grid(cfg, model)?;
    let mut csv = String::from("t,abs_dg\n");
    let mut max_dev = 0.0_f64;
    for &t in &display {
        let tn = t * scale;
        let direct = survival_amplitude(model, params, tn).map_err(map_error)?;
        let closed = chain_closed_form(cfg.delta0, tn, params.quad_tol).map_err(map_error)?;
        let dev = (direct - closed).norm();
        max_dev = max_dev.max(dev);
        csv.push_str(&format!("{},{}\n", sci(t), sci(dev)));
    }
    emit_csv(cfg, &csv)?;
    let tol = cfg.tol.unwrap_or(1e-8);
    if max_dev <= tol {
        println!(
            "chain-crosscheck: PASS (max |Δg| = {} <= {})",
            sci(max_dev),
            sci(tol)
        );
        Ok(())
    } else {
        println!(
            "chain-crosscheck: FAIL (max |Δg| = {} > {})",
            sci(max_dev),
            sci(tol)
        );
        Err(Failure::Validation(format!(
            "closed-form comparison failed: max |Δg| = {} exceeds {}",
            sci(max_dev),
            sci(tol)
        )))
    }
}

fn run(cfg: RunConfig) -> Result<(), Failure> {
    let model = build_model(&cfg)?;
    let params = SystemParams::new(cfg.epsilon);
    match cfg.mode {
        Mode::Series => run_series(&cfg, &model, &params),
        Mode::Poles => run_poles(&model, &params),
        Mode::Spectral => run_spectral(&cfg, &model, &params),
        Mode::Tail => run_tail(&cfg, &model, &params),
        Mode::ShortTime => run_short_time(&model, &params),
        Mode::CompareOracle => run_compare_oracle(&cfg, &model, &params),
        Mode::ChainCrosscheck => run_chain_crosscheck(&cfg, &model, &params),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match resolve_config(cli).and_then(run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
