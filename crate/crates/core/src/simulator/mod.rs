//! Event-level Monte Carlo of the coincidence experiment: photon pairs with
//! comb-distributed relative delays, a 50/50 beamsplitter, two jittered
//! detectors, and a single-stop TAC feeding a multichannel analyser.
//!
//! Work is split into fixed time slices, each with its own ChaCha stream, so
//! the output depends on the seed alone and never on the number of workers.

mod config;
mod events;
mod sampler;
mod tac;

pub use config::{Detector, DetectorConfig, EmissionConfig, EventRecord, TacConfig};
pub use events::{generate_events, SLICE_SECONDS};
pub use sampler::PairDelaySampler;
pub use tac::tac_mca_histogram;

use crate::correlation::CoincidenceModelParams;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::histogram::Histogram;
use crate::units::{angular_to_mhz, to_ns, to_ps};

/// Generate events and histogram them in one go. The histogram metadata
/// records the acquisition and the seed.
pub fn simulate(
    emission: &EmissionConfig,
    detectors: &[DetectorConfig; 2],
    tac: &TacConfig,
    exec: Execution,
) -> Result<Histogram> {
    tac.validate()?;
    let events = generate_events(emission, detectors, exec)?;
    let mut h = tac_mca_histogram(&events, tac, exec)?;
    annotate(&mut h, emission, detectors, tac);
    Ok(h)
}

/// Record the acquisition settings and seed in the histogram metadata.
pub fn annotate(h: &mut Histogram, e: &EmissionConfig, d: &[DetectorConfig; 2], t: &TacConfig) {
    h.set_meta("duration_s", e.duration);
    h.set_meta("pair_rate_hz", e.pair_rate);
    h.set_meta("seed", e.seed);
    h.set_meta("tau_f_ns", to_ns(e.opo.tau_f()));
    h.set_meta("omega_c_mhz", angular_to_mhz(e.opo.omega_c()));
    h.set_meta("escape_efficiency", e.opo.finesse_ratio());
    h.set_meta("n_modes_half", e.opo.n_modes_half());
    h.set_meta("t_r1_ps", to_ps(d[0].jitter.t_r()));
    h.set_meta("t_r2_ps", to_ps(d[1].jitter.t_r()));
    h.set_meta("efficiency1", d[0].efficiency);
    h.set_meta("efficiency2", d[1].efficiency);
    h.set_meta("tau0_ns", to_ns(t.electronic_delay));
    h.set_meta("window_start_ns", to_ns(t.window_start));
    h.set_meta("window_stop_ns", to_ns(t.window_stop));
    h.set_meta("start_channel", t.start_channel.id());
}

/// Coincidence-model parameters an ideal analysis should recover from a
/// simulated histogram, from the delta-comb treatment of the emission model:
///
/// * `C1 = R T eta1 eta2 w (a / 8) tanh(omega_c tau_F / 2)` with `a = 2 ln2 / T_R`,
/// * `C1 C2 = R^2 T eta1 eta2 w` (accidentals between distinct pairs).
///
/// TAC dead time is ignored, so the prediction holds when the stop rate
/// times the window is small. Distinct detector widths are combined as
/// `sqrt((T1^2 + T2^2) / 2)`, which is exact only when they agree.
pub fn expected_model_params(
    e: &EmissionConfig,
    d: &[DetectorConfig; 2],
    t: &TacConfig,
) -> Result<CoincidenceModelParams> {
    e.validate()?;
    t.validate()?;
    let t_r = ((d[0].jitter.t_r().powi(2) + d[1].jitter.t_r().powi(2)) / 2.0).sqrt();
    let a = 2.0 * std::f64::consts::LN_2 / t_r;
    let tau_f = e.opo.tau_f();
    let omega_c = e.opo.omega_c();
    let eff = d[0].efficiency * d[1].efficiency;
    let shape = (0.5 * omega_c * tau_f).tanh();
    let c1 = e.pair_rate * e.duration * eff * t.bin_width * a / 8.0 * shape;
    if !(c1 > 0.0) {
        return Err(Error::invalid("expected count scale is not positive"));
    }
    let floor = e.pair_rate.powi(2) * e.duration * eff * t.bin_width;
    CoincidenceModelParams::new(tau_f, t_r, omega_c, c1, floor / c1, t.electronic_delay)
}
