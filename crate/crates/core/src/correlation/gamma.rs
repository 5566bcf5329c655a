use std::cell::Cell;

use super::comb::fejer_comb;
use super::jitter::JitterModel;
use super::params::OpoParams;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};

/// Intensity correlation `Gamma(tau)` of the multimode OPO output, including
/// the delay-independent multi-pair term and the `[1 + (2 eps / omega_c)^2]`
/// correction to the comb term.
pub fn gamma_exact(p: &OpoParams, tau: f64) -> f64 {
    let r = p.threshold_ratio().powi(2);
    let m = p.mode_count();
    let scale = p.epsilon().powi(2) * p.finesse_ratio().powi(2);
    let floor = r * m * m;
    let comb = (-p.omega_c() * tau.abs()).exp() * fejer_comb(p.omega_f(), p.n_modes_half(), tau);
    scale * (floor + comb * (1.0 + r))
}

/// Jitter average of an arbitrary correlation function:
/// `integral f(t1) p(t2) p(t2 + tau - t1) dt1 dt2`.
///
/// Both integrals are done numerically. The outer one runs over the support
/// of the jitter autocorrelation around `tau`, split at `tau` and at every
/// entry of `breakpoints` that falls inside.
pub fn jitter_average<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    j: &JitterModel,
    tau: f64,
    opts: &QuadratureOptions,
) -> Result<f64> {
    let reach = j.autocorrelation_support();
    let (lo, hi) = (tau - reach, tau + reach);
    let mut pts = Vec::with_capacity(breakpoints.len() + 3);
    pts.extend([lo, tau, hi]);
    pts.extend(breakpoints.iter().copied().filter(|&b| b > lo && b < hi));

    let inner_opts = QuadratureOptions {
        rel_tol: (opts.rel_tol * 1e-3).clamp(1e-13, 1e-9),
        abs_tol: 0.0,
        max_subintervals: opts.max_subintervals,
    };
    let inner_failure: Cell<Option<Error>> = Cell::new(None);
    let outer = integrate(
        |t1| {
            let fv = f(t1);
            if fv == 0.0 {
                return 0.0;
            }
            match j.autocorrelation_numeric(tau - t1, &inner_opts) {
                Ok(k) => fv * k,
                Err(e) => {
                    inner_failure.set(Some(e));
                    0.0
                }
            }
        },
        &pts,
        opts,
    );
    if let Some(e) = inner_failure.take() {
        return Err(e);
    }
    Ok(outer?.value)
}

/// Jitter-averaged correlation `Gamma-bar(tau)` by nested adaptive
/// quadrature over [`gamma_exact`]. The outer integral is split at every
/// comb peak, every half-period and every lobe zero inside the window.
pub fn gamma_bar_numeric(p: &OpoParams, j: &JitterModel, tau: f64, opts: &QuadratureOptions) -> Result<f64> {
    let tau_f = p.tau_f();
    let reach = j.autocorrelation_support();
    let (lo, hi) = (tau - reach, tau + reach);
    let m = p.mode_count();

    // Lobe zeros sit at k tau_F / M; they include the peaks (k multiple of M)
    // only when M = 1, so add peaks and half-periods separately.
    let mut breaks = vec![0.0];
    let k_lo = (lo / tau_f).floor() as i64;
    let k_hi = (hi / tau_f).ceil() as i64;
    for k in k_lo..=k_hi {
        breaks.push(k as f64 * tau_f);
        breaks.push((k as f64 + 0.5) * tau_f);
    }
    let lobe = tau_f / m;
    let zeros = ((hi - lo) / lobe).ceil();
    if p.n_modes_half() > 0 && zeros < 200_000.0 {
        let z_lo = (lo / lobe).floor() as i64;
        let z_hi = (hi / lobe).ceil() as i64;
        breaks.extend((z_lo..=z_hi).map(|z| z as f64 * lobe));
    }
    jitter_average(|t| gamma_exact(p, t), &breaks, j, tau, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference_opo(n: u32, r: f64) -> OpoParams {
        OpoParams::from_cavity(2.0 * PI * 11e6, 0.7, 2.07e-9, r.sqrt(), n).unwrap()
    }

    /// Independent term-by-term evaluation, written without the shared helpers.
    fn gamma_oracle(g1: f64, g2: f64, eps: f64, tau_f: f64, n: u32, tau: f64) -> f64 {
        let wc = g1 + g2;
        let m = (2 * n + 1) as f64;
        let ff0 = g1 / wc;
        let x = PI * tau / tau_f;
        let ratio = if x.sin().abs() < 1e-300 {
            m * m
        } else {
            (m * x).sin().powi(2) / x.sin().powi(2)
        };
        let first = (2.0 * eps * m / wc).powi(2);
        let second = (-wc * tau.abs()).exp() * ratio * (1.0 + (2.0 * eps / wc).powi(2));
        eps * eps * ff0 * ff0 * (first + second)
    }

    #[test]
    fn symmetric_in_delay() {
        let p = reference_opo(50, 1e-4);
        for tau in [0.3e-9, 1.1e-9, 17.0e-9, 123.4e-9] {
            assert_eq!(gamma_exact(&p, tau), gamma_exact(&p, -tau));
        }
    }

    #[test]
    fn single_mode_is_pure_exponential() {
        let p = reference_opo(0, 1e-3);
        let wc = p.omega_c();
        let r = p.threshold_ratio().powi(2);
        let pref = p.epsilon().powi(2) * p.finesse_ratio().powi(2);
        for tau in [0.0, 0.5e-9, 1.035e-9, 2.07e-9, 40e-9] {
            let expected = pref * (r + (-wc * tau).exp() * (1.0 + r));
            let got = gamma_exact(&p, tau);
            assert!(((got - expected) / expected).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_term_by_term_oracle() {
        let p = reference_opo(50, 1e-4);
        for k in 0..200 {
            let tau = -30e-9 + k as f64 * 0.3137e-9;
            let ours = gamma_exact(&p, tau);
            let oracle = gamma_oracle(p.gamma1(), p.gamma2(), p.epsilon(), p.tau_f(), 50, tau);
            assert!(((ours - oracle) / oracle).abs() < 1e-9, "tau={tau}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn peak_to_floor_at_origin() {
        let p = reference_opo(50, 1e-4);
        let r = p.threshold_ratio().powi(2);
        let floor = gamma_exact(&p, 1e3);
        let peak = gamma_exact(&p, 0.0);
        let ratio = (peak - floor) / floor;
        let oracle = {
            let g0 = gamma_oracle(p.gamma1(), p.gamma2(), p.epsilon(), p.tau_f(), 50, 0.0);
            let gf = gamma_oracle(p.gamma1(), p.gamma2(), p.epsilon(), p.tau_f(), 50, 1e3);
            (g0 - gf) / gf
        };
        assert!(((ratio - (1.0 + r) / r) / ratio).abs() < 1e-9);
        assert!(((ratio - oracle) / oracle).abs() < 1e-9);
        assert!((ratio - 1.0e4).abs() / 1.0e4 < 1e-3);
    }

    #[test]
    fn floor_and_peak_scaling_with_gain() {
        let p = reference_opo(20, 1e-4);
        let q = p.with_epsilon(2.0 * p.epsilon()).unwrap();
        let far = 1.0; // one second: envelope is exactly zero
        let floor_ratio = gamma_exact(&q, far) / gamma_exact(&p, far);
        assert!((floor_ratio - 16.0).abs() < 1e-12 * 16.0);
        // The multi-pair floor goes as eps^4, the peak term as eps^2.
        let floor_p = gamma_exact(&p, far) / p.epsilon().powi(2);
        let floor_q = gamma_exact(&q, far) / q.epsilon().powi(2);
        assert!((floor_q / floor_p - 4.0).abs() < 1e-12);
        let peak_p = gamma_exact(&p, 0.0) - gamma_exact(&p, far);
        let peak_q = gamma_exact(&q, 0.0) - gamma_exact(&q, far);
        let ratio = peak_q / peak_p;
        assert!((3.99..=4.01).contains(&ratio), "{ratio}");
    }

    #[test]
    fn narrow_jitter_recovers_exact_correlation() {
        let p = reference_opo(5, 1e-4);
        let j = JitterModel::new(1e-15).unwrap();
        let opts = QuadratureOptions::with_rel_tol(1e-8);
        for tau in [0.13e-9, 0.77e-9, 3.3e-9, -5.21e-9] {
            let bar = gamma_bar_numeric(&p, &j, tau, &opts).unwrap();
            let exact = gamma_exact(&p, tau);
            assert!(((bar - exact) / exact).abs() < 1e-4, "tau={tau}: {bar} vs {exact}");
        }
    }

    #[test]
    fn averaged_correlation_is_even() {
        let p = reference_opo(10, 1e-4);
        let j = JitterModel::new(285e-12).unwrap();
        let opts = QuadratureOptions::default();
        for tau in [0.4e-9, 2.5e-9] {
            let a = gamma_bar_numeric(&p, &j, tau, &opts).unwrap();
            let b = gamma_bar_numeric(&p, &j, -tau, &opts).unwrap();
            assert!(((a - b) / a).abs() < 1e-6);
        }
    }

    #[test]
    fn impulse_input_reproduces_autocorrelation() {
        // f = narrow unit-area box standing in for a Dirac impulse at 0.
        let j = JitterModel::new(285e-12).unwrap();
        let w = 1e-15;
        let opts = QuadratureOptions::with_rel_tol(1e-9);
        for delta in [0.0, 0.1e-9, 0.4e-9, -0.7e-9] {
            let got = jitter_average(
                |t: f64| if t.abs() < w / 2.0 { 1.0 / w } else { 0.0 },
                &[-w / 2.0, w / 2.0],
                &j,
                delta,
                &opts,
            )
            .unwrap();
            let expected = j.autocorrelation(delta);
            assert!(((got - expected) / expected).abs() < 1e-6, "{got} vs {expected}");
        }
    }
}
