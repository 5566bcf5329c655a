//! `opocomb`: evaluate, simulate and fit coincidence histograms of a
//! multimode OPO pair source.
//!
//! Exit codes: 0 success, 1 I/O error, 2 parse or usage error, 3 invalid
//! configuration or parameters, 4 fit failure (no convergence, too few
//! peaks, singular problem).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{CurveModel, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "opocomb", version, about)]
struct Cli {
    /// TOML configuration; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a correlation or coincidence curve on a delay grid.
    Eval(EvalArgs),
    /// Monte Carlo a coincidence histogram.
    Simulate(SimulateArgs),
    /// Fit the coincidence model to a histogram file.
    Fit(FitArgs),
    /// Finesse and round-trip loss from bandwidth and round-trip time.
    Loss(LossArgs),
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum)]
    model: Option<CurveModel>,
    /// Grid start, ns.
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    /// Grid end (inclusive), ns.
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    /// Grid step, ns.
    #[arg(long)]
    step: Option<f64>,
    /// Modes on each side of degeneracy.
    #[arg(long)]
    n_modes: Option<u32>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    pair_rate: Option<f64>,
    #[arg(long)]
    pump_scale: Option<f64>,
    /// Acquisition time, s.
    #[arg(long)]
    duration: Option<f64>,
    /// Histogram file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump the raw detection events.
    #[arg(long)]
    events_out: Option<PathBuf>,
    /// Skip emission and histogram a previously dumped event file.
    #[arg(long)]
    replay: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Histogram file.
    input: PathBuf,
    /// Flat key-value report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Fitted curve at the bin centres.
    #[arg(long)]
    curve_out: Option<PathBuf>,
    /// Hold a parameter fixed (repeatable): tau_f, t_r, omega_c, c1, c2, tau0.
    #[arg(long)]
    freeze: Vec<String>,
    /// Start from the `[model]` section instead of the automatic guess.
    #[arg(long)]
    use_model_guess: bool,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args, Debug)]
struct LossArgs {
    #[arg(long)]
    omega_c_mhz: Option<f64>,
    #[arg(long)]
    tau_f_ns: Option<f64>,
    /// Output-coupler transmittance.
    #[arg(long)]
    t_oc: Option<f64>,
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            RunConfig::from_toml(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn apply_overrides(c: &mut RunConfig, cmd: &Command) {
    fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
        if let Some(v) = src {
            *dst = v.clone();
        }
    }
    match cmd {
        Command::Eval(a) => {
            set(&mut c.eval.model, &a.model);
            set(&mut c.eval.from_ns, &a.from);
            set(&mut c.eval.to_ns, &a.to);
            set(&mut c.eval.step_ns, &a.step);
            set(&mut c.opo.n_modes_half, &a.n_modes);
        }
        Command::Simulate(a) => {
            set(&mut c.seed, &a.seed);
            set(&mut c.source.pair_rate_hz, &a.pair_rate);
            set(&mut c.source.pump_scale, &a.pump_scale);
            set(&mut c.source.duration_s, &a.duration);
        }
        Command::Fit(a) => {
            c.fit.freeze.extend(a.freeze.iter().cloned());
            c.fit.use_model_guess |= a.use_model_guess;
            set(&mut c.fit.max_iter, &a.max_iter);
        }
        Command::Loss(a) => {
            set(&mut c.opo.omega_c_mhz, &a.omega_c_mhz);
            set(&mut c.opo.tau_f_ns, &a.tau_f_ns);
            set(&mut c.loss.t_oc, &a.t_oc);
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_ref())?;
    apply_overrides(&mut cfg, &cli.command);
    if cli.dump_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    match &cli.command {
        Command::Eval(a) => commands::eval(&cfg, a.out.as_deref()),
        Command::Simulate(a) => commands::simulate(
            &cfg,
            a.workers,
            a.out.as_deref(),
            a.events_out.as_deref(),
            a.replay.as_deref(),
        ),
        Command::Fit(a) => commands::fit(&cfg, &a.input, a.report.as_deref(), a.curve_out.as_deref()),
        Command::Loss(_) => commands::loss(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, hint) = commands::classify(&e);
            eprintln!("error: {e:#}");
            if let Some(h) = hint {
                eprintln!("hint: {h}");
            }
            ExitCode::from(code)
        }
    }
}
