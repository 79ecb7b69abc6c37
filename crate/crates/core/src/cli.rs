//! `goodwin-delay` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 failed analysis
//! precondition, 3 simulation failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{analyze, fmt_f64, sweep_header, sweep_row, Analysis};
use crate::error::Error;
use crate::params::{ModelParameters, RawParameters, FIELD_NAMES};
use crate::sim::{amplitude_envelope, classify_envelope, oscillation_period, simulate, HistorySpec, SimOptions};
use crate::spectral::DEFAULT_J_MAX;
use crate::subsystem::{equilibrium, subsystem_coefficients, State, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_ANALYSIS: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;

/// Largest accepted sweep.
pub const MAX_SWEEP_POINTS: usize = 1_000_000;
/// Envelope drift tolerance for the sustained class.
pub const ENVELOPE_TOLERANCE: f64 = 0.02;
pub const THREADS_ENV: &str = "GOODWIN_DELAY_THREADS";

const ENGINE: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"), " (", env!("GOODWIN_DELAY_GIT"), ")");

#[derive(Parser, Debug)]
#[command(name = "goodwin-delay", version, about = "Hopf analysis and simulation of the delayed Goodwin subsystems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Equilibrium, critical delays and first Lyapunov coefficient.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Delay at which to state the verdict.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
    },
    /// Integrate the delay equation from a constant history.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau: f64,
        #[arg(long = "t-end")]
        t_end: f64,
        /// Step hint; rounded down so it divides the delay.
        #[arg(long)]
        step: Option<f64>,
        /// Initial state `beta,lambda` (default: equilibrium minus 0.05).
        #[arg(long)]
        init: Option<String>,
    },
    /// Tabulate the analysis over a range of τ or one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `tau` or one of the seventeen parameter names.
        #[arg(long = "sweep-param", default_value = "tau")]
        sweep_param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        points: usize,
        /// Delay for the verdict column when sweeping a parameter.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long = "with-hopf")]
        with_hopf: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "A")]
    variant: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_J_MAX)]
    jmax: usize,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    /// Config errors keep code 1 whatever stage raised them.
    fn from_error(e: &Error, stage_code: i32) -> Self {
        let code = if e.is_config_error() { EXIT_CONFIG } else { stage_code };
        Failure::new(code, format!("{}: {e}", e.tag()))
    }

    fn io(e: anyhow::Error) -> Self {
        Failure::new(EXIT_CONFIG, format!("{e:#}"))
    }
}

/// Runs the CLI with the given arguments (including the program name),
/// writing human output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze { common, tau } => cmd_analyze(&common, tau, out),
        Command::Simulate {
            common,
            tau,
            t_end,
            step,
            init,
        } => cmd_simulate(&common, tau, t_end, step, init.as_deref(), out),
        Command::Sweep {
            common,
            sweep_param,
            from,
            to,
            points,
            tau,
            with_hopf,
        } => cmd_sweep(&common, &sweep_param, from, to, points, tau, with_hopf, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_config(path: &Path) -> Result<RawParameters, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(Failure::io)?;
    RawParameters::from_json_str(&text).map_err(|e| Failure::from_error(&e, EXIT_CONFIG))
}

fn setup(common: &Common) -> Result<(RawParameters, Variant), Failure> {
    let raw = load_config(&common.config)?;
    let variant: Variant = common.variant.parse().map_err(|e| Failure::from_error(&e, EXIT_CONFIG))?;
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating output directory {}", common.out.display()))
        .map_err(Failure::io)?;
    Ok((raw, variant))
}

fn validated(raw: RawParameters) -> Result<ModelParameters, Failure> {
    raw.validate().map_err(|e| Failure::from_error(&e, EXIT_CONFIG))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::io)
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("documents serialize");
    v.push(b'\n');
    v
}

fn finite(name: &str, x: f64) -> Result<(), Failure> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_CONFIG, format!("--{name} must be finite")))
    }
}

fn cmd_analyze(common: &Common, tau: f64, out: &mut dyn Write) -> Result<(), Failure> {
    let (raw, variant) = setup(common)?;
    let p = validated(raw)?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Failure::new(EXIT_CONFIG, "--tau must be finite and >= 0"));
    }
    let a = analyze(&p, variant, tau, common.jmax, true).map_err(|e| Failure::from_error(&e, EXIT_ANALYSIS))?;
    write_file(&common.out.join("analysis.json"), &to_json(&a.document()))?;
    let _ = out.write_all(summary(&a).as_bytes());
    Ok(())
}

/// Human-readable analysis summary.
pub fn summary(a: &Analysis) -> String {
    let mut s = String::new();
    let eq = &a.equilibrium;
    let sp = &a.spectral;
    let _ = writeln!(s, "system {}", a.variant);
    let _ = writeln!(s, "equilibrium: beta_e = {:.6}, lambda_e = {:.6}", eq.beta_e, eq.lambda_e);
    if let Some(ls) = eq.lambda_star {
        let _ = writeln!(s, "psi root: lambda_e* = {ls:.6}");
    }
    let c = &sp.coefficients;
    let _ = writeln!(s, "p0 = {:.6}, r0 = {:.6}, q0 = {:.6}", c.p0, c.r0, c.q0);
    let _ = writeln!(s, "h case: {}", sp.h.case);
    match (sp.tau0, sp.omega0) {
        (Some(t), Some(w)) => {
            let _ = writeln!(s, "omega0 = {w:.6}, tau0 = {t:.7}");
        }
        _ => {
            let _ = writeln!(s, "no imaginary-axis crossing");
        }
    }
    if let Some(tr) = sp.transversality {
        let _ = writeln!(s, "h'(z0) = {:.6}, Re lambda'(tau0) = {:.6}", tr.h_prime, tr.re_lambda_prime);
    }
    let _ = writeln!(s, "verdict at tau = {}: {}", a.tau, a.verdict.label());
    match &a.hopf {
        Some(Ok(h)) => {
            let r = &h.report;
            let _ = writeln!(s, "c1(0) = {:.8} {:+.8}i", r.c1_0.re, r.c1_0.im);
            let _ = writeln!(s, "mu2 = {:.6}, beta2 = {:.6}", r.mu2_bar, r.beta2);
            let _ = writeln!(s, "direction: {}", r.direction);
            let _ = writeln!(s, "orbit stability: {}", r.orbit_stability);
            let _ = writeln!(s, "period estimate: {:.4}", r.period_estimate);
        }
        Some(Err(e)) => {
            let _ = writeln!(s, "normal form failed: {e}");
        }
        None => {}
    }
    for w in a.warnings() {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

fn parse_init(text: &str) -> Result<State, Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Failure::new(EXIT_CONFIG, format!("--init expects `beta,lambda`, got `{text}`"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let beta: f64 = parts[0].parse().map_err(|_| bad())?;
    let lambda: f64 = parts[1].parse().map_err(|_| bad())?;
    if !(beta.is_finite() && lambda.is_finite()) {
        return Err(bad());
    }
    Ok(State::new(beta, lambda))
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    engine: &'a str,
    variant: Variant,
    parameters: RawParameters,
    tau: f64,
    t_end: f64,
    step: f64,
    steps_per_delay: Option<usize>,
    history: HistorySpec,
    digest: &'a str,
    overflow: bool,
    samples: usize,
    envelope: Option<&'a str>,
    envelope_drift: Option<f64>,
    period: Option<f64>,
}

fn cmd_simulate(
    common: &Common,
    tau: f64,
    t_end: f64,
    step: Option<f64>,
    init: Option<&str>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let (raw, variant) = setup(common)?;
    let p = validated(raw)?;
    finite("tau", tau)?;
    finite("t-end", t_end)?;
    let coeffs = subsystem_coefficients(&p, variant).map_err(|e| Failure::from_error(&e, EXIT_ANALYSIS))?;
    let start = match init {
        Some(text) => parse_init(text)?,
        None => {
            let eq = equilibrium(&coeffs, &p).map_err(|e| Failure::from_error(&e, EXIT_ANALYSIS))?;
            State::new(eq.beta_e - 0.05, eq.lambda_e - 0.05)
        }
    };
    let mut opts = SimOptions::new(t_end);
    opts.step_hint = step;
    let history = HistorySpec::constant(start);
    let traj = simulate(&coeffs, tau, history, opts).map_err(|e| Failure::from_error(&e, EXIT_SIMULATION))?;

    let mut csv_out = csv::Writer::from_writer(Vec::new());
    let mut phase = csv::Writer::from_writer(Vec::new());
    let _ = csv_out.write_record(["t", "beta", "lambda"]);
    let _ = phase.write_record(["beta", "lambda"]);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let _ = csv_out.write_record([fmt_f64(*t), fmt_f64(s.beta), fmt_f64(s.lambda)]);
        let _ = phase.write_record([fmt_f64(s.beta), fmt_f64(s.lambda)]);
    }
    let csv_bytes = csv_out.into_inner().expect("in-memory writer");
    let phase_bytes = phase.into_inner().expect("in-memory writer");
    write_file(&common.out.join("trajectory.csv"), &csv_bytes)?;
    write_file(&common.out.join("phase.csv"), &phase_bytes)?;
    write_file(&common.out.join("plot.gp"), PLOT_SCRIPT.as_bytes())?;

    let classified = amplitude_envelope(&traj, t_end / 10.0)
        .ok()
        .and_then(|env| classify_envelope(&env, ENVELOPE_TOLERANCE));
    let period = oscillation_period(&traj).ok();
    let class_name = classified.map(|(c, _)| c.to_string());
    let meta = RunMetadata {
        engine: ENGINE,
        variant,
        parameters: *p.raw(),
        tau,
        t_end,
        step: traj.meta.step,
        steps_per_delay: traj.meta.steps_per_delay,
        history,
        digest: &traj.meta.digest,
        overflow: traj.meta.overflow,
        samples: traj.states.len(),
        envelope: class_name.as_deref(),
        envelope_drift: classified.map(|(_, d)| d),
        period,
    };
    write_file(&common.out.join("trajectory.json"), &to_json(&meta))?;

    let last = traj.last();
    let _ = writeln!(
        out,
        "simulated {} steps of {} (tau = {tau}, step = {})",
        traj.states.len() - 1,
        variant,
        fmt_f64(traj.meta.step)
    );
    let _ = writeln!(out, "final state: beta = {:.6}, lambda = {:.6}", last.beta, last.lambda);
    if traj.meta.overflow {
        let _ = writeln!(out, "warning: state exceeded 1e6, run truncated");
    }
    if let Some(p) = period {
        let _ = writeln!(out, "period: {p:.4}");
    }
    match classified {
        Some((class, drift)) => {
            let _ = writeln!(out, "envelope: {class} (drift {:+.4}%)", drift * 100.0);
        }
        None => {
            let _ = writeln!(out, "envelope: unavailable (run too short)");
        }
    }
    Ok(())
}

const PLOT_SCRIPT: &str = "\
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 1000,450
set output 'trajectory.png'
set multiplot layout 1,2
set xlabel 't'
plot 'trajectory.csv' using 1:2 with lines title 'beta', '' using 1:3 with lines title 'lambda'
set xlabel 'beta'
set ylabel 'lambda'
plot 'phase.csv' using 1:2 with lines notitle
unset multiplot
";

/// Evenly spaced sweep values, endpoints included.
pub fn sweep_values(from: f64, to: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(from.is_finite() && to.is_finite()) {
        return Err("sweep range must be finite".into());
    }
    if points == 0 || points > MAX_SWEEP_POINTS {
        return Err(format!("--points must be in 1..={MAX_SWEEP_POINTS}"));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let n = (points - 1) as f64;
    Ok((0..points).map(|k| from + (to - from) * (k as f64 / n)).collect())
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Failure::new(EXIT_CONFIG, format!("{THREADS_ENV} must be a positive integer")))?;
        if n == 0 {
            return Err(Failure::new(EXIT_CONFIG, format!("{THREADS_ENV} must be a positive integer")));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("thread pool: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    common: &Common,
    param: &str,
    from: f64,
    to: f64,
    points: usize,
    tau: f64,
    with_hopf: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let (raw, variant) = setup(common)?;
    if param != "tau" && !FIELD_NAMES.contains(&param) {
        return Err(Failure::new(EXIT_CONFIG, format!("unknown sweep parameter `{param}`")));
    }
    let values = sweep_values(from, to, points).map_err(|m| Failure::new(EXIT_CONFIG, m))?;
    finite("tau", tau)?;
    let j_max = common.jmax;

    let point = |v: f64| {
        let (point_raw, point_tau) = if param == "tau" {
            (raw, v)
        } else {
            let mut r = raw;
            r.set(param, v)?;
            (r, tau)
        };
        let p = point_raw.validate()?;
        analyze(&p, variant, point_tau, j_max, with_hopf)
    };
    let pool = thread_pool()?;
    let rows: Vec<Vec<String>> = pool.install(|| {
        values
            .par_iter()
            .map(|&v| sweep_row(v, &point(v), with_hopf))
            .collect()
    });

    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(sweep_header(param, with_hopf));
    for r in &rows {
        let _ = w.write_record(r);
    }
    let bytes = w.into_inner().expect("in-memory writer");
    write_file(&common.out.join("sweep.csv"), &bytes)?;
    let failed = rows.iter().filter(|r| r[1] != "ok" && r[1] != "NoCrossing").count();
    let _ = writeln!(out, "swept {param} over {} points ({failed} failed)", rows.len());
    Ok(())
}
