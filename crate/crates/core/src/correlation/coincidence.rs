use std::f64::consts::LN_2;

use super::jitter::JitterModel;
use super::params::{CoincidenceModelParams, OpoParams};

/// The comb sum is extended until the bound on the dropped tail falls below
/// this fraction of the retained sum.
pub const COMB_TAIL_TOLERANCE: f64 = 1e-9;

const MAX_COMB_TERMS: usize = 10_000_000;

/// `(1 + 2|delta| ln 2 / T_R) exp(-2|delta| ln 2 / T_R)`: the jitter
/// autocorrelation normalised to 1 at zero delay.
pub fn peak_shape(delta: f64, t_r: f64) -> f64 {
    let x = 2.0 * LN_2 * delta.abs() / t_r;
    (1.0 + x) * (-x).exp()
}

/// `sum_n peak_shape(offset - n tau_F)` over at least `n_window` periods on
/// either side of the nearest peak, extended outward until the geometric
/// tail bound is below [`COMB_TAIL_TOLERANCE`] of the sum.
pub fn comb_sum(offset: f64, tau_f: f64, t_r: f64, n_window: u32) -> f64 {
    let centre = (offset / tau_f).round();
    let term = |n: f64| peak_shape(offset - n * tau_f, t_r);

    let mut sum = term(centre);
    let w = f64::from(n_window.max(1));
    for k in 1..=n_window.max(1) {
        let k = f64::from(k);
        sum += term(centre + k) + term(centre - k);
    }

    // Successive terms moving away from the peak shrink by at least q.
    let s = 2.0 * LN_2 * tau_f / t_r;
    let q = (1.0 + s) * (-s).exp();
    let tail_factor = if q < 1.0 { q / (1.0 - q) } else { f64::INFINITY };

    let (mut right, mut left) = (term(centre + w), term(centre - w));
    let mut k = w;
    let mut count = 2 * n_window.max(1) as usize + 1;
    while (right + left) * tail_factor > COMB_TAIL_TOLERANCE * sum && count < MAX_COMB_TERMS {
        k += 1.0;
        right = term(centre + k);
        left = term(centre - k);
        sum += right + left;
        count += 2;
    }
    sum
}

/// Expected coincidence counts at delay `tau`:
/// `C1 [C2 + exp(-omega_c |tau - tau0|) sum_n peak_shape(tau - n tau_F - tau0)]`.
///
/// The envelope multiplies the whole sum. No validation is done here so that
/// optimisers can probe arbitrary points; use
/// [`CoincidenceModelParams::validate`] for the physical domain.
pub fn coincidence_model(m: &CoincidenceModelParams, tau: f64, n_window: u32) -> f64 {
    let offset = tau - m.tau0;
    let envelope = (-m.omega_c * offset.abs()).exp();
    m.c1 * (m.c2 + envelope * comb_sum(offset, m.tau_f, m.t_r, n_window))
}

/// Coincidence-model parameters equivalent to replacing each comb lobe of
/// [`super::gamma_exact`] by a delta function of the same area and averaging
/// over `j`. The `[1 + (2 eps / omega_c)^2]` factor is kept, `tau0 = 0`.
pub fn delta_comb_params(p: &OpoParams, j: &JitterModel) -> CoincidenceModelParams {
    let r = p.threshold_ratio().powi(2);
    let m = p.mode_count();
    let scale = p.epsilon().powi(2) * p.finesse_ratio().powi(2);
    let kernel_peak = 0.25 * j.decay_rate();
    let c1 = scale * (1.0 + r) * p.tau_f() * m * kernel_peak;
    let c2 = scale * r * m * m / c1;
    CoincidenceModelParams {
        tau_f: p.tau_f(),
        t_r: j.t_r(),
        omega_c: p.omega_c(),
        c1,
        c2,
        tau0: 0.0,
    }
}
