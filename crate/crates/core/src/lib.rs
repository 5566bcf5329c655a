//! Two-photon correlations of a multimode optical parametric oscillator far
//! below threshold.
//!
//! * [`correlation`]: the pair correlation function, its jitter-averaged form
//!   and the closed-form coincidence model, plus cavity loss helpers.
//! * [`simulator`]: Monte Carlo pair emission, detection and start-stop
//!   histogramming.
//! * [`fitter`]: least-squares recovery of the coincidence-model parameters.
//! * [`io`]: text formats for histograms, events, curves and reports.
//!
//! Internally all quantities are SI; see [`units`].

pub mod correlation;
pub mod error;
pub mod exec;
pub mod fitter;
pub mod histogram;
pub mod io;
pub mod quadrature;
pub mod simulator;
pub mod units;

pub use error::{Error, Result};
pub use exec::Execution;
pub use histogram::Histogram;
