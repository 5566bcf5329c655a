use rand::Rng;

use crate::correlation::{fejer_comb, OpoParams};
use crate::error::{Error, Result};
use crate::quadrature::gauss_kronrod21;

const MIN_TABLE_CELLS: usize = 4096;
const CELLS_PER_LOBE: usize = 64;

/// Exact sampler for the pair relative delay, whose density is proportional
/// to `exp(-omega_c |tau|) * fejer_comb(tau)`.
///
/// Writing `tau = n tau_F + u` with `u` in one comb period, the period index
/// is drawn from its exact marginal (a point mass at `n = 0` plus a two-sided
/// geometric law), `u` is drawn from the comb lobe by inverse CDF, and the
/// residual envelope tilt inside the period is removed by rejection with
/// acceptance at least `exp(-omega_c tau_F)`.
#[derive(Debug, Clone)]
pub struct PairDelaySampler {
    omega_c: f64,
    tau_f: f64,
    /// Cumulative comb integral on a uniform grid over `[-tau_F/2, tau_F/2]`.
    cdf: Vec<f64>,
    cell: f64,
    p_centre: f64,
    log_q: f64,
}

impl PairDelaySampler {
    pub fn new(opo: &OpoParams) -> Result<Self> {
        let tau_f = opo.tau_f();
        let omega_c = opo.omega_c();
        let m = opo.mode_count();
        let cells = MIN_TABLE_CELLS.max(CELLS_PER_LOBE * m as usize);
        let cell = tau_f / cells as f64;
        let lo = -0.5 * tau_f;
        let comb = |t: f64| fejer_comb(opo.omega_f(), opo.n_modes_half(), t);

        let mut cdf = Vec::with_capacity(cells + 1);
        cdf.push(0.0);
        let mut centre_mass = 0.0;
        let mut tilt_mass = 0.0;
        for i in 0..cells {
            let a = lo + i as f64 * cell;
            let b = a + cell;
            let (mass, _) = gauss_kronrod21(&comb, a, b);
            let (c, _) = gauss_kronrod21(&|t: f64| comb(t) * (-omega_c * t.abs()).exp(), a, b);
            let (s, _) = gauss_kronrod21(&|t: f64| comb(t) * (omega_c * t).cosh(), a, b);
            centre_mass += c;
            tilt_mass += s;
            cdf.push(cdf[i] + mass);
        }

        // Self-check: strictly increasing, and the period integral equals M tau_F.
        if let Some(i) = cdf.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::TabulationFailure(format!("CDF not increasing at cell {i}")));
        }
        let total = *cdf.last().expect("non-empty table");
        let expected = m * tau_f;
        if ((total - expected) / expected).abs() > 1e-9 {
            return Err(Error::TabulationFailure(format!(
                "period integral {total:e} differs from {expected:e}"
            )));
        }

        let q_log = -omega_c * tau_f;
        let q = q_log.exp();
        let side_mass = 2.0 * tilt_mass * q / (1.0 - q);
        Ok(Self {
            omega_c,
            tau_f,
            cdf,
            cell,
            p_centre: centre_mass / (centre_mass + side_mass),
            log_q: q_log,
        })
    }

    pub fn tau_f(&self) -> f64 {
        self.tau_f
    }

    /// Probability that a delay falls in the central period `|tau| < tau_F/2`.
    pub fn central_probability(&self) -> f64 {
        self.p_centre
    }

    fn sample_lobe<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cdf.last().expect("non-empty table");
        let target = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= target).clamp(1, self.cdf.len() - 1) - 1;
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let frac = ((target - c0) / (c1 - c0)).clamp(0.0, 1.0);
        -0.5 * self.tau_f + (i as f64 + frac) * self.cell
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random::<f64>() < self.p_centre {
            loop {
                let u = self.sample_lobe(rng);
                if rng.random::<f64>() < (-self.omega_c * u.abs()).exp() {
                    return u;
                }
            }
        }
        // |n| >= 1 with P(|n| = k) proportional to q^k.
        let uniform = 1.0 - rng.random::<f64>();
        let k = 1.0 + (uniform.ln() / self.log_q).floor();
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        loop {
            let u = self.sample_lobe(rng);
            let accept = (-self.omega_c * (sign * u + 0.5 * self.tau_f)).exp();
            if rng.random::<f64>() < accept {
                return sign * k * self.tau_f + u;
            }
        }
    }
}
