//! Coincidence-histogram fitting: automatic starting values, damped
//! nonlinear least squares against [`coincidence_model`], and residual
//! diagnostics.
//!
//! [`coincidence_model`]: crate::correlation::coincidence_model

mod gof;
mod guess;
mod lm;
mod problem;

pub use gof::{goodness_of_fit, GoodnessOfFit};
pub use guess::{initial_guess, initial_guess_from_samples};
pub use lm::{fit, FitResult};
pub use problem::{FitProblem, Param, Weighting};
