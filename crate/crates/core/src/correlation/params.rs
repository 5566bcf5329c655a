use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Physical parameters of the cavity and pump.
///
/// `epsilon` carries the same units as the coupling constants (rad/s): only
/// the ratio `2 epsilon / omega_c` is physically meaningful. It is taken real
/// and non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoParams {
    gamma1: f64,
    gamma2: f64,
    epsilon: f64,
    omega_f: f64,
    n_modes_half: u32,
    omega0: f64,
}

impl OpoParams {
    /// `gamma1` couples the output mirror, `gamma2` all other losses.
    pub fn new(gamma1: f64, gamma2: f64, epsilon: f64, omega_f: f64, n_modes_half: u32) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma1.is_finite()) {
            return Err(Error::invalid(format!("gamma1 must be positive, got {gamma1}")));
        }
        if !(gamma2 >= 0.0 && gamma2.is_finite()) {
            return Err(Error::invalid(format!("gamma2 must be non-negative, got {gamma2}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be non-negative, got {epsilon}")));
        }
        if !(omega_f > 0.0 && omega_f.is_finite()) {
            return Err(Error::invalid(format!("omega_F must be positive, got {omega_f}")));
        }
        let threshold = 2.0 * epsilon / (gamma1 + gamma2);
        if threshold >= 1.0 {
            return Err(Error::invalid(format!(
                "above threshold: 2 epsilon / omega_c = {threshold} must be < 1"
            )));
        }
        Ok(Self {
            gamma1,
            gamma2,
            epsilon,
            omega_f,
            n_modes_half,
            omega0: 0.0,
        })
    }

    /// Build from the bandwidth, the escape efficiency `F/F0`, the round-trip
    /// time and the threshold ratio `2 epsilon / omega_c`.
    pub fn from_cavity(
        omega_c: f64,
        escape_efficiency: f64,
        tau_f: f64,
        threshold_ratio: f64,
        n_modes_half: u32,
    ) -> Result<Self> {
        if !(escape_efficiency > 0.0 && escape_efficiency <= 1.0) {
            return Err(Error::invalid(format!(
                "escape efficiency must lie in (0, 1], got {escape_efficiency}"
            )));
        }
        if !(tau_f > 0.0) {
            return Err(Error::invalid(format!("tau_F must be positive, got {tau_f}")));
        }
        Self::new(
            escape_efficiency * omega_c,
            (1.0 - escape_efficiency) * omega_c,
            0.5 * threshold_ratio * omega_c,
            2.0 * PI / tau_f,
            n_modes_half,
        )
    }

    /// Carrier (degenerate) frequency. Metadata only.
    pub fn with_carrier(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn omega_f(&self) -> f64 {
        self.omega_f
    }

    pub fn n_modes_half(&self) -> u32 {
        self.n_modes_half
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Number of longitudinal modes, `2N + 1`.
    pub fn mode_count(&self) -> f64 {
        2.0 * f64::from(self.n_modes_half) + 1.0
    }

    /// Cavity bandwidth `gamma1 + gamma2`.
    pub fn omega_c(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    /// Finesse ratio `F/F0 = gamma1 / (gamma1 + gamma2)`.
    pub fn finesse_ratio(&self) -> f64 {
        self.gamma1 / self.omega_c()
    }

    /// Round-trip time `2 pi / omega_F`.
    pub fn tau_f(&self) -> f64 {
        2.0 * PI / self.omega_f
    }

    /// `2 epsilon / omega_c`, the pump level relative to threshold.
    pub fn threshold_ratio(&self) -> f64 {
        2.0 * self.epsilon / self.omega_c()
    }

    pub fn is_far_below_threshold(&self) -> bool {
        self.threshold_ratio().powi(2) < 0.01
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.gamma1, self.gamma2, epsilon, self.omega_f, self.n_modes_half)
            .map(|p| p.with_carrier(self.omega0))
    }

    pub fn with_n_modes_half(&self, n_modes_half: u32) -> Self {
        Self { n_modes_half, ..*self }
    }
}

/// Output-operator coefficients at a single frequency offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCoefficients {
    pub big_g1: Complex64,
    pub small_g1: Complex64,
    pub big_g2: Complex64,
    pub small_g2: Complex64,
}

/// Coefficients `G1, g1, G2, g2` at offset `omega` from degeneracy.
pub fn spectral_coefficients(p: &OpoParams, omega: f64) -> SpectralCoefficients {
    let denom = Complex64::new(p.gamma1 + p.gamma2, -2.0 * omega);
    let denom_sq = denom * denom;
    let root = (p.gamma1 * p.gamma2).sqrt();
    SpectralCoefficients {
        big_g1: Complex64::new(p.gamma1 - p.gamma2, 2.0 * omega) / denom,
        small_g1: Complex64::from(4.0 * p.epsilon * p.gamma1) / denom_sq,
        big_g2: Complex64::from(2.0 * root) / denom,
        small_g2: Complex64::from(4.0 * p.epsilon * root) / denom_sq,
    }
}

/// The six parameters of the coincidence-count model.
///
/// Fields are public so optimisers can move through intermediate values;
/// [`CoincidenceModelParams::new`] and [`CoincidenceModelParams::validate`]
/// enforce the physical domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceModelParams {
    /// Comb period (cavity round-trip time), s.
    pub tau_f: f64,
    /// Detector resolving time (FWHM of the jitter density), s.
    pub t_r: f64,
    /// Cavity bandwidth, rad/s.
    pub omega_c: f64,
    /// Overall count scale.
    pub c1: f64,
    /// Accidental floor relative to `c1`.
    pub c2: f64,
    /// Electronic delay, s.
    pub tau0: f64,
}

impl CoincidenceModelParams {
    pub fn new(tau_f: f64, t_r: f64, omega_c: f64, c1: f64, c2: f64, tau0: f64) -> Result<Self> {
        let m = Self {
            tau_f,
            t_r,
            omega_c,
            c1,
            c2,
            tau0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau_F", self.tau_f),
            ("T_R", self.t_r),
            ("omega_c", self.omega_c),
            ("C1", self.c1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.c2 >= 0.0 && self.c2.is_finite()) {
            return Err(Error::invalid(format!("C2 must be non-negative, got {}", self.c2)));
        }
        if !self.tau0.is_finite() {
            return Err(Error::invalid("tau0 must be finite"));
        }
        Ok(())
    }

    /// Oscillations are only visible when the resolving time is shorter than
    /// the comb period.
    pub fn peaks_resolvable(&self) -> bool {
        self.t_r < self.tau_f
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.tau_f, self.t_r, self.omega_c, self.c1, self.c2, self.tau0]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            tau_f: v[0],
            t_r: v[1],
            omega_c: v[2],
            c1: v[3],
            c2: v[4],
            tau0: v[5],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mhz(f: f64) -> f64 {
        2.0 * PI * f * 1e6
    }

    #[test]
    fn rejects_invalid_fields() {
        assert!(OpoParams::new(0.0, 1.0, 0.0, 1.0, 0).is_err());
        assert!(OpoParams::new(1.0, -1.0, 0.0, 1.0, 0).is_err());
        assert!(OpoParams::new(1.0, 0.0, -0.1, 1.0, 0).is_err());
        assert!(OpoParams::new(1.0, 0.0, 0.1, 0.0, 0).is_err());
        // 2 eps / omega_c = 1 is threshold
        assert!(OpoParams::new(1.0, 1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn derived_quantities() {
        let p = OpoParams::new(mhz(40.0), mhz(3.0), 1e5, 2.0 * PI / 2.07e-9, 10).unwrap();
        assert!((p.omega_c() - mhz(43.0)).abs() < 1e-6);
        assert!((p.finesse_ratio() - 40.0 / 43.0).abs() < 1e-15);
        assert!((p.tau_f() - 2.07e-9).abs() < 1e-24);
        assert_eq!(p.mode_count(), 21.0);
        assert!(p.is_far_below_threshold());
    }

    #[test]
    fn big_g1_vanishes_for_balanced_coupling() {
        let p = OpoParams::new(mhz(5.0), mhz(5.0), 1e5, 1e9, 0).unwrap();
        let c = spectral_coefficients(&p, 0.0);
        assert_eq!(c.big_g1.norm(), 0.0);
    }

    #[test]
    fn small_g1_at_zero_offset_is_real() {
        let (g1, g2, eps) = (mhz(40.0), mhz(3.0), 1.7e5);
        let p = OpoParams::new(g1, g2, eps, 1e9, 0).unwrap();
        let c = spectral_coefficients(&p, 0.0);
        let expected = 4.0 * eps * g1 / (g1 + g2).powi(2);
        assert_eq!(c.small_g1.im, 0.0);
        assert!((c.small_g1.re - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn unitarity_on_linear_grid() {
        let p = OpoParams::new(mhz(40.0), mhz(3.0), 1e-3, 1e9, 0).unwrap();
        let wc = p.omega_c();
        for k in 0..=1000 {
            let omega = -5.0 * wc + 10.0 * wc * k as f64 / 1000.0;
            let c = spectral_coefficients(&p, omega);
            let s = c.big_g1.norm_sqr() + c.big_g2.norm_sqr();
            assert!((s - 1.0).abs() < 1e-12, "omega={omega}: {s}");
        }
    }

    #[test]
    fn loss_to_coupler_amplitude_ratio() {
        let p = OpoParams::new(mhz(40.0), mhz(3.0), 2e5, 1e9, 0).unwrap();
        for omega in [0.0, 1e7, -3e8] {
            let c = spectral_coefficients(&p, omega);
            let ratio = c.small_g2 / c.small_g1;
            assert!((ratio.re - (3.0f64 / 40.0).sqrt()).abs() < 1e-14);
            assert!(ratio.im.abs() < 1e-14);
        }
    }

    #[test]
    fn model_params_validation() {
        assert!(CoincidenceModelParams::new(2.07e-9, 285e-12, mhz(11.0), 1446.0, 0.067, 39e-9).is_ok());
        assert!(CoincidenceModelParams::new(2.07e-9, 285e-12, mhz(11.0), 1446.0, -0.1, 39e-9).is_err());
        assert!(CoincidenceModelParams::new(0.0, 285e-12, mhz(11.0), 1446.0, 0.0, 39e-9).is_err());
        let m = CoincidenceModelParams::new(2.07e-9, 285e-12, mhz(11.0), 1.0, 0.0, 0.0).unwrap();
        assert!(m.peaks_resolvable());
        assert_eq!(CoincidenceModelParams::from_array(m.to_array()), m);
    }
}
