use std::f64::consts::LN_2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};

/// Detector timing-jitter density
/// `p(tau) = (ln 2 / T_R) exp(-2 |tau| ln 2 / T_R)`, a Laplace density whose
/// full width at half maximum is `T_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterModel {
    t_r: f64,
}

impl JitterModel {
    pub fn new(t_r: f64) -> Result<Self> {
        if !(t_r > 0.0 && t_r.is_finite()) {
            return Err(Error::invalid(format!("resolving time must be positive, got {t_r}")));
        }
        Ok(Self { t_r })
    }

    /// FWHM of the density.
    pub fn t_r(&self) -> f64 {
        self.t_r
    }

    /// Exponential decay rate `2 ln 2 / T_R`.
    pub fn decay_rate(&self) -> f64 {
        2.0 * LN_2 / self.t_r
    }

    pub fn density(&self, tau: f64) -> f64 {
        let a = self.decay_rate();
        0.5 * a * (-a * tau.abs()).exp()
    }

    /// Closed-form `integral p(t) p(t + delta) dt`:
    /// `(ln 2 / (2 T_R)) (1 + 2|delta| ln 2 / T_R) exp(-2|delta| ln 2 / T_R)`.
    pub fn autocorrelation(&self, delta: f64) -> f64 {
        let a = self.decay_rate();
        let x = a * delta.abs();
        0.25 * a * (1.0 + x) * (-x).exp()
    }

    /// Half-width beyond which the autocorrelation is below `1e-16` of its
    /// peak.
    pub fn autocorrelation_support(&self) -> f64 {
        40.0 / self.decay_rate()
    }

    /// The same autocorrelation by direct quadrature of `p(t) p(t + delta)`,
    /// split at the two cusps `t = 0` and `t = -delta`.
    pub fn autocorrelation_numeric(&self, delta: f64, opts: &QuadratureOptions) -> Result<f64> {
        let a = self.decay_rate();
        let lo = 0f64.min(-delta);
        let hi = 0f64.max(-delta);
        let reach = 25.0 / a;
        let r = integrate(
            |t| self.density(t) * self.density(t + delta),
            &[lo - reach, lo, hi, hi + reach],
            opts,
        )?;
        Ok(r.value)
    }

    /// Draw one jitter offset by inverting the Laplace CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>() - 0.5;
        let scale = 1.0 / self.decay_rate();
        // u = -0.5 would give ln(0)
        let mag = -scale * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln();
        if u < 0.0 {
            -mag
        } else {
            mag
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normalised() {
        let j = JitterModel::new(285e-12).unwrap();
        let reach = 60.0 / j.decay_rate();
        let r = integrate(|t| j.density(t), &[-reach, 0.0, reach], &QuadratureOptions::with_rel_tol(1e-12))
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fwhm_definition() {
        let j = JitterModel::new(285e-12).unwrap();
        assert!((j.density(j.t_r() / 2.0) / j.density(0.0) - 0.5).abs() < 1e-15);
        assert!((j.density(-j.t_r() / 2.0) / j.density(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn autocorrelation_closed_form_matches_quadrature() {
        let j = JitterModel::new(285e-12).unwrap();
        let opts = QuadratureOptions::with_rel_tol(1e-12);
        for k in -40..=40 {
            let delta = k as f64 * 25e-12;
            let num = j.autocorrelation_numeric(delta, &opts).unwrap();
            let closed = j.autocorrelation(delta);
            assert!(((num - closed) / closed).abs() < 1e-8, "delta={delta}: {num} vs {closed}");
        }
    }

    #[test]
    fn rejects_nonpositive_width() {
        assert!(JitterModel::new(0.0).is_err());
        assert!(JitterModel::new(f64::NAN).is_err());
    }

    #[test]
    fn samples_have_laplace_moments() {
        let j = JitterModel::new(285e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| j.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let b = 1.0 / j.decay_rate();
        // Laplace variance is 2 b^2; sd of the mean is sqrt(2/n) b.
        assert!(mean.abs() < 4.0 * (2.0 / n as f64).sqrt() * b);
        assert!((var / (2.0 * b * b) - 1.0).abs() < 0.02);
        let within_half = xs.iter().filter(|x| x.abs() < j.t_r() / 2.0).count() as f64 / n as f64;
        // P(|x| < T_R/2) = 1 - exp(-ln 2) = 1/2
        assert!((within_half - 0.5).abs() < 0.005);
    }
}
