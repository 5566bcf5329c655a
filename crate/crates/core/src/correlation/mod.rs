//! Analytic layer: spectral coefficients of the below-threshold OPO output,
//! the intensity correlation function and its jitter-averaged forms, and a
//! few derived cavity quantities.
//!
//! Every function here is pure. Parameter structs are validated at
//! construction, so evaluation never fails except where numerical
//! integration is involved.

mod cavity;
mod coincidence;
mod comb;
mod gamma;
mod jitter;
mod params;

pub use cavity::{estimate_intracavity_loss, round_trip_time_from_length, LossEstimate, Segment};
pub use coincidence::{coincidence_model, comb_sum, delta_comb_params, peak_shape, COMB_TAIL_TOLERANCE};
pub use comb::fejer_comb;
pub use gamma::{gamma_bar_numeric, gamma_exact, jitter_average};
pub use jitter::JitterModel;
pub use params::{spectral_coefficients, CoincidenceModelParams, OpoParams, SpectralCoefficients};
