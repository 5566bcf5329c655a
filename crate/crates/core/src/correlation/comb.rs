use std::f64::consts::PI;

/// `sin^2[(2N+1) omega_F tau / 2] / sin^2(omega_F tau / 2)`.
///
/// The phase is reduced to `delta` in `[-pi/2, pi/2]` via the comb period
/// before evaluation, which keeps the function exactly periodic in floating
/// point. Within `|sin(delta)| < 1e-6` the second-order series
/// `M^2 (1 - (M^2 - 1) delta^2 / 3)` replaces the ratio.
pub fn fejer_comb(omega_f: f64, n_half: u32, tau: f64) -> f64 {
    let m = 2.0 * f64::from(n_half) + 1.0;
    if n_half == 0 {
        return 1.0;
    }
    let cycles = tau * omega_f / (2.0 * PI);
    let delta = PI * (cycles - cycles.round());
    let s = delta.sin();
    if s.abs() < 1e-6 && m * delta.abs() < 1e-3 {
        m * m * (1.0 - (m * m - 1.0) * delta * delta / 3.0)
    } else {
        let num = (m * delta).sin();
        (num * num) / (s * s)
    }
}
