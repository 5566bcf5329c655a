use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

use opocomb::correlation::{
    coincidence_model, estimate_intracavity_loss, gamma_bar_numeric, gamma_exact, JitterModel,
};
use opocomb::fitter::{fit as run_fit, goodness_of_fit, initial_guess, FitProblem, Param};
use opocomb::io::{read_events, read_histogram, write_curve, write_events, write_histogram, write_kv};
use opocomb::quadrature::QuadratureOptions;
use opocomb::simulator::{annotate, generate_events, tac_mca_histogram};
use opocomb::units::{mhz_to_angular, ns, to_ns};
use opocomb::{Error, Execution};

use crate::config::{param_key, to_boundary, CurveModel, RunConfig};

/// Failures that originate in the CLI itself rather than the library.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("fit did not converge within {0} iterations")]
    NotConverged(usize),
}

pub fn classify(e: &anyhow::Error) -> (u8, Option<&'static str>) {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Io(_) => (1, None),
                Error::Parse { .. } => (2, None),
                Error::TooFewPeaks { .. } => (
                    4,
                    Some("check T_R < tau_F; single-mode data or slow detectors show no comb"),
                ),
                Error::SingularNormalMatrix(_) => {
                    (4, Some("freeze a parameter the data cannot constrain, or widen the window"))
                }
                Error::InsufficientData(_) => (4, Some("the histogram needs at least 20 non-empty bins")),
                Error::QuadratureFailure { .. } => (4, Some("loosen eval.rel_tol")),
                Error::NegativeLoss { .. } => (3, Some("t_oc cannot exceed omega_c * tau_F")),
                _ => (3, None),
            };
        }
        if let Some(err) = cause.downcast_ref::<CliError>() {
            return match err {
                CliError::BadRange(_) => (3, Some("need from < to and 0 < step <= to - from")),
                CliError::NotConverged(_) => (4, Some("raise fit.max_iter or start from a closer [model] guess")),
            };
        }
        if cause.downcast_ref::<toml::de::Error>().is_some() {
            return (2, None);
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return (1, None);
        }
    }
    (3, None)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn input(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// Grid `from, from + step, ...` up to `to` inclusive.
fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) {
        bail!(CliError::BadRange("grid bounds must be finite".into()));
    }
    if !(to > from) || !(step > 0.0) || step > to - from {
        bail!(CliError::BadRange(format!("from {from} ns, to {to} ns, step {step} ns")));
    }
    let n = ((to - from) / step * (1.0 + 1e-12)).floor() as usize + 1;
    Ok((0..n).map(|i| from + i as f64 * step).collect())
}

/// Combined width of two detectors' jitter for a single-width model.
fn combined_jitter(cfg: &RunConfig) -> Result<JitterModel> {
    let d = cfg.detectors()?;
    let t1 = d[0].jitter.t_r();
    let t2 = d[1].jitter.t_r();
    Ok(JitterModel::new(((t1 * t1 + t2 * t2) / 2.0).sqrt())?)
}

pub fn eval(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let e = &cfg.eval;
    let taus = grid(e.from_ns, e.to_ns, e.step_ns)?;
    let name = clap::ValueEnum::to_possible_value(&e.model).expect("no skipped variants");
    let mut header = vec![kv("model", name.get_name())];
    let values: Vec<f64> = match e.model {
        CurveModel::Gamma | CurveModel::GammaBar => {
            let p = cfg.opo_params()?;
            header.push(kv("omega_c_mhz", cfg.opo.omega_c_mhz));
            header.push(kv("tau_f_ns", cfg.opo.tau_f_ns));
            header.push(kv("escape_efficiency", cfg.opo.escape_efficiency));
            header.push(kv("threshold_ratio", p.threshold_ratio()));
            header.push(kv("n_modes_half", p.n_modes_half()));
            header.push(kv("value_units", "s^-2"));
            if e.model == CurveModel::Gamma {
                taus.iter().map(|&t| gamma_exact(&p, ns(t))).collect()
            } else {
                let j = combined_jitter(cfg)?;
                header.push(kv("t_r_ps", j.t_r() * 1e12));
                let opts = QuadratureOptions::with_rel_tol(e.rel_tol);
                taus.iter()
                    .map(|&t| gamma_bar_numeric(&p, &j, ns(t), &opts))
                    .collect::<opocomb::Result<_>>()?
            }
        }
        CurveModel::Coincidence => {
            let m = cfg.model_params()?;
            let b = &cfg.model;
            header.push(kv("tau_f_ns", b.tau_f_ns));
            header.push(kv("t_r_ps", b.t_r_ps));
            header.push(kv("omega_c_mhz", b.omega_c_mhz));
            header.push(kv("c1", b.c1));
            header.push(kv("c2", b.c2));
            header.push(kv("tau0_ns", b.tau0_ns));
            header.push(kv("value_units", "counts per bin"));
            taus.iter().map(|&t| coincidence_model(&m, ns(t), 1)).collect()
        }
    };
    let points: Vec<(f64, f64)> = taus.into_iter().zip(values).collect();
    write_curve(output(out)?, &header, "tau_ns", "value", &points)?;
    Ok(())
}

fn build_pool(workers: Option<usize>) -> Result<(rayon::ThreadPool, Execution)> {
    let n = workers.unwrap_or(0);
    let exec = if n == 1 { Execution::Sequential } else { Execution::Parallel };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
    Ok((pool, exec))
}

pub fn simulate(
    cfg: &RunConfig,
    workers: Option<usize>,
    out: Option<&Path>,
    events_out: Option<&Path>,
    replay: Option<&Path>,
) -> Result<()> {
    if workers == Some(0) {
        bail!(Error::InvalidParams("--workers must be at least 1".into()));
    }
    let tac = cfg.tac()?;
    let (pool, exec) = build_pool(workers)?;

    let h = if let Some(path) = replay {
        let events = read_events(input(path)?)?;
        let mut h = pool.install(|| tac_mca_histogram(&events, &tac, exec))?;
        h.set_meta("replay_of", path.display());
        h.set_meta("tau0_ns", cfg.tac.tau0_ns);
        h.set_meta("window_start_ns", cfg.tac.window_start_ns);
        h.set_meta("window_stop_ns", cfg.tac.window_stop_ns);
        h.set_meta("start_channel", cfg.tac.start_channel);
        h
    } else {
        let emission = cfg.emission()?;
        let detectors = cfg.detectors()?;
        let (events, mut h) = pool.install(|| -> Result<_> {
            let events = generate_events(&emission, &detectors, exec)?;
            let h = tac_mca_histogram(&events, &tac, exec)?;
            Ok((events, h))
        })?;
        annotate(&mut h, &emission, &detectors, &tac);
        h.set_meta("pump_scale", cfg.source.pump_scale);
        if let Some(path) = events_out {
            let header: Vec<_> = h.meta.clone();
            let w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            write_events(w, &events, &header)?;
        }
        h
    };
    write_histogram(output(out)?, &h)?;
    Ok(())
}

pub fn fit(cfg: &RunConfig, path: &Path, report: Option<&Path>, curve_out: Option<&Path>) -> Result<()> {
    let h = read_histogram(input(path)?)?;
    let mut problem = FitProblem::from_histogram(&h)?.with_weighting(cfg.weighting());
    for p in cfg.frozen()? {
        problem = problem.freeze(p);
    }
    problem.max_iter = cfg.fit.max_iter;
    problem.multi_start = cfg.fit.multi_start;
    let guess = if cfg.fit.use_model_guess {
        cfg.model_params()?
    } else {
        initial_guess(&h)?
    };
    let r = run_fit(&problem, &guess)?;
    let g = goodness_of_fit(&r);

    let mut pairs = Vec::new();
    for p in Param::ALL {
        let v = r.params.to_array()[p.index()];
        pairs.push(kv(param_key(p), to_boundary(p, v)));
        pairs.push(kv(&format!("{}_err", param_key(p)), to_boundary(p, r.uncertainty(p)).abs()));
    }
    pairs.push(kv("reduced_chi2", r.reduced_chi2));
    pairs.push(kv("dof", r.dof));
    pairs.push(kv("runs_p_value", g.runs_p_value));
    pairs.push(kv("max_abs_standardized_residual", g.max_abs_standardized_residual));
    pairs.push(kv("max_residual_bin_ns", to_ns(h.center(g.max_residual_bin))));
    pairs.push(kv("n_iterations", r.n_iterations));
    pairs.push(kv("converged", r.converged));

    let mut stdout = io::stdout().lock();
    writeln!(stdout, "fit of {} ({} bins, {} counts)", path.display(), h.len(), h.total())?;
    for p in Param::ALL {
        let i = p.index();
        let v = to_boundary(p, r.params.to_array()[i]);
        let free = if r.free[i] { "" } else { "  (frozen)" };
        writeln!(stdout, "  {:<12} = {:>14.6} +/- {:<12.4e}{free}", param_key(p), v, to_boundary(p, r.uncertainty(p)).abs())?;
    }
    writeln!(stdout, "  reduced chi2 = {:.4} over {} dof", r.reduced_chi2, r.dof)?;
    writeln!(stdout, "  runs-test p  = {:.4}", g.runs_p_value)?;
    writeln!(
        stdout,
        "  max |z|      = {:.3} at {:.3} ns",
        g.max_abs_standardized_residual,
        to_ns(h.center(g.max_residual_bin))
    )?;
    writeln!(stdout, "  iterations   = {} (converged: {})", r.n_iterations, r.converged)?;
    stdout.flush()?;

    if let Some(p) = report {
        write_kv(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?), &pairs)?;
    }
    if let Some(p) = curve_out {
        let pts: Vec<(f64, f64)> = h
            .bin_centers()
            .into_iter()
            .map(|t| (to_ns(t), coincidence_model(&r.params, t, problem.n_window)))
            .collect();
        let mut header = vec![kv("model", "coincidence"), kv("source", path.display())];
        header.extend(pairs.iter().take(12).step_by(2).cloned());
        header.push(kv("value_units", "counts per bin"));
        let w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
        write_curve(w, &header, "tau_ns", "value", &pts)?;
    }
    if !r.converged {
        bail!(CliError::NotConverged(r.n_iterations));
    }
    Ok(())
}

pub fn loss(cfg: &RunConfig) -> Result<()> {
    let l = estimate_intracavity_loss(mhz_to_angular(cfg.opo.omega_c_mhz), ns(cfg.opo.tau_f_ns), cfg.loss.t_oc)?;
    let mut out = io::stdout().lock();
    writeln!(out, "finesse = {}", l.finesse)?;
    writeln!(out, "total_loss = {}", l.total_loss)?;
    writeln!(out, "output_coupler = {}", cfg.loss.t_oc)?;
    writeln!(out, "other_loss = {}", l.other_loss)?;
    writeln!(out, "# other losses ~ {:.1}% of the round trip", 100.0 * l.other_loss)?;
    Ok(())
}
