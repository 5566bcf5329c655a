use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEstimate {
    /// `FSR / bandwidth = (2 pi / tau_F) / omega_c`.
    pub finesse: f64,
    /// Round-trip loss `2 pi / F = omega_c tau_F` (low-loss approximation).
    pub total_loss: f64,
    /// Round-trip loss other than the output coupler.
    pub other_loss: f64,
}

/// Split the round-trip loss implied by the bandwidth and round-trip time
/// into output-coupler transmittance and everything else.
pub fn estimate_intracavity_loss(omega_c: f64, tau_f: f64, t_output_coupler: f64) -> Result<LossEstimate> {
    if !(omega_c > 0.0 && omega_c.is_finite()) {
        return Err(Error::invalid(format!("omega_c must be positive, got {omega_c}")));
    }
    if !(tau_f > 0.0 && tau_f.is_finite()) {
        return Err(Error::invalid(format!("tau_F must be positive, got {tau_f}")));
    }
    if !(t_output_coupler > 0.0 && t_output_coupler < 1.0) {
        return Err(Error::invalid(format!(
            "output-coupler transmittance must lie in (0, 1), got {t_output_coupler}"
        )));
    }
    let finesse = 2.0 * PI / tau_f / omega_c;
    let total_loss = 2.0 * PI / finesse;
    let other_loss = total_loss - t_output_coupler;
    // Tolerate round-off when the coupler accounts for all of the loss.
    if other_loss < -1e-12 * total_loss {
        return Err(Error::NegativeLoss {
            coupler: t_output_coupler,
            total: total_loss,
        });
    }
    Ok(LossEstimate {
        finesse,
        total_loss,
        other_loss: other_loss.max(0.0),
    })
}

/// A stretch of the round trip with its own refractive index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub length: f64,
    pub index: f64,
}

impl Segment {
    pub fn new(length: f64, index: f64) -> Self {
        Self { length, index }
    }
}

/// Round-trip time of a cavity whose geometric round-trip length is
/// `path_length` (m). `refractive_segments` lie inside that length; the rest
/// of the path is taken as vacuum.
pub fn round_trip_time_from_length(path_length: f64, refractive_segments: &[Segment]) -> Result<f64> {
    if !(path_length > 0.0 && path_length.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "round-trip length must be positive, got {path_length}"
        )));
    }
    let mut inside = 0.0;
    let mut optical = 0.0;
    for s in refractive_segments {
        if !(s.length > 0.0 && s.length.is_finite()) {
            return Err(Error::InvalidGeometry(format!("segment length must be positive, got {}", s.length)));
        }
        if !(s.index >= 1.0 && s.index.is_finite()) {
            return Err(Error::InvalidGeometry(format!("refractive index must be >= 1, got {}", s.index)));
        }
        inside += s.length;
        optical += s.length * s.index;
    }
    if inside > path_length * (1.0 + 1e-12) {
        return Err(Error::InvalidGeometry(format!(
            "segments total {inside} m but the round trip is only {path_length} m"
        )));
    }
    let vacuum = (path_length - inside).max(0.0);
    Ok((optical + vacuum) / SPEED_OF_LIGHT)
}
