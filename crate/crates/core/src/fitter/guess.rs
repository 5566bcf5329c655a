use std::f64::consts::LN_2;

use crate::correlation::{coincidence_model, CoincidenceModelParams};
use crate::error::{Error, Result};
use crate::histogram::Histogram;

const SMOOTHING_HALF_WIDTH: usize = 2;

/// Root of `(1 + x) e^{-x} = 1/2`: the half-maximum point of the peak shape
/// in units of `T_R / (2 ln 2)`.
fn half_max_root() -> f64 {
    let mut x = 1.7f64;
    for _ in 0..50 {
        let f = (1.0 + x) * (-x).exp() - 0.5;
        let df = -x * (-x).exp();
        x -= f / df;
    }
    x
}

/// Starting values for [`super::fit`], read off the histogram shape.
pub fn initial_guess(h: &Histogram) -> Result<CoincidenceModelParams> {
    initial_guess_from_samples(&h.bin_centers(), &h.counts_f64())
}

/// * floor: median of the bins at or below the 20th percentile;
/// * `tau0`: centre of the tallest bin;
/// * `tau_F`: median spacing of peaks standing `5 sqrt(floor)` above the
///   floor, both in height and in prominence (on a 5-bin running mean),
///   refined by regressing peak position on peak order;
/// * `omega_c`: slope of `ln(height - floor)` against `|t - tau0|`;
/// * `T_R`: from the FWHM of the tallest peak via the peak-shape inverse;
/// * `C1 = max - floor`, `C2 = floor / C1`, then both re-solved by linear
///   least squares with the other four held fixed.
pub fn initial_guess_from_samples(centers: &[f64], counts: &[f64]) -> Result<CoincidenceModelParams> {
    let n = counts.len();
    if n < 8 || centers.len() != n {
        return Err(Error::InsufficientData("too few bins for an initial guess".into()));
    }

    let mut sorted = counts.to_vec();
    sorted.sort_by(f64::total_cmp);
    let p20 = sorted[((n - 1) as f64 * 0.2) as usize];
    let below: Vec<f64> = sorted.iter().copied().filter(|&c| c <= p20).collect();
    let floor = below[below.len() / 2];
    let threshold = 5.0 * floor.max(1.0).sqrt();

    let smooth = running_mean(counts, SMOOTHING_HALF_WIDTH);
    let peaks: Vec<usize> = local_maxima(&smooth)
        .into_iter()
        .filter(|&i| smooth[i] - floor > threshold && prominence(&smooth, i) > threshold)
        .collect();
    if peaks.len() < 3 {
        return Err(Error::TooFewPeaks { found: peaks.len() });
    }

    // First maximal bin.
    let top = counts
        .iter()
        .enumerate()
        .fold(0, |best, (i, &c)| if c > counts[best] { i } else { best });
    let tau0 = centers[top];
    let c_max = counts[top];

    let mut spacings: Vec<f64> = peaks.windows(2).map(|w| centers[w[1]] - centers[w[0]]).collect();
    spacings.sort_by(f64::total_cmp);
    let median_spacing = spacings[spacings.len() / 2];
    let tau_f = comb_period(&peaks, centers, tau0, median_spacing);

    let omega_c = envelope_slope(&peaks, centers, &smooth, floor, tau0).unwrap_or_else(|| {
        let span = centers[n - 1] - centers[0];
        1.0 / span
    });

    let half = floor + 0.5 * (c_max - floor);
    let left = crossing(counts, centers, top, half, -1);
    let right = crossing(counts, centers, top, half, 1);
    let fwhm = right - left;
    let t_r = fwhm * LN_2 / half_max_root();

    let c1 = c_max - floor;
    if !(c1 > 0.0 && t_r > 0.0 && tau_f > 0.0) {
        return Err(Error::TooFewPeaks { found: peaks.len() });
    }
    let mut m = CoincidenceModelParams {
        tau_f,
        t_r,
        omega_c,
        c1,
        c2: floor / c1,
        tau0,
    };
    // The percentile floor still carries the peak tails. With the shape
    // fixed the model is linear in C1 and C1 C2, so solve for those.
    // The envelope slope depends on the floor, so alternate a few times.
    for _ in 0..3 {
        let Some((c1, c2)) = linear_amplitudes(&m, centers, counts) else {
            break;
        };
        m.c1 = c1;
        m.c2 = c2;
        if let Some(w) = envelope_slope(&peaks, centers, &smooth, c1 * c2, tau0) {
            m.omega_c = w;
        }
    }
    if let Some((c1, c2)) = linear_amplitudes(&m, centers, counts) {
        m.c1 = c1;
        m.c2 = c2;
    }
    Ok(m)
}

fn linear_amplitudes(m: &CoincidenceModelParams, centers: &[f64], counts: &[f64]) -> Option<(f64, f64)> {
    let unit = CoincidenceModelParams { c1: 1.0, c2: 0.0, ..*m };
    let s: Vec<f64> = centers.iter().map(|&t| coincidence_model(&unit, t, 1)).collect();
    let n = s.len() as f64;
    let s_mean = s.iter().sum::<f64>() / n;
    let y_mean = counts.iter().sum::<f64>() / n;
    let sxx: f64 = s.iter().map(|v| (v - s_mean).powi(2)).sum();
    let sxy: f64 = s.iter().zip(counts).map(|(v, y)| (v - s_mean) * (y - y_mean)).sum();
    let beta = sxy / sxx;
    let alpha = y_mean - beta * s_mean;
    (beta > 0.0 && alpha >= 0.0 && beta.is_finite()).then(|| (beta, alpha / beta))
}

/// Bin quantisation makes single spacings coarse; a straight-line fit of
/// peak position against peak order recovers the period to sub-bin accuracy.
fn comb_period(peaks: &[usize], centers: &[f64], tau0: f64, spacing: f64) -> f64 {
    let pts: Vec<(f64, f64)> = peaks
        .iter()
        .map(|&i| (((centers[i] - tau0) / spacing).round(), centers[i]))
        .collect();
    let n = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mt = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let skk: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
    let skt: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1 - mt)).sum();
    let slope = skt / skk;
    if slope.is_finite() && (slope - spacing).abs() < 0.25 * spacing {
        slope
    } else {
        spacing
    }
}

fn running_mean(x: &[f64], half: usize) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Indices of local maxima; on a plateau the earliest bin is taken.
fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < x.len() {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < x.len() && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < x.len() && x[j + 1] < x[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Height above the higher of the two bases reached before meeting a taller
/// point (or the edge) on either side.
fn prominence(x: &[f64], i: usize) -> f64 {
    let v = x[i];
    let mut left_min = v;
    for &y in x[..i].iter().rev() {
        if y > v {
            break;
        }
        left_min = left_min.min(y);
    }
    let mut right_min = v;
    for &y in &x[i + 1..] {
        if y > v {
            break;
        }
        right_min = right_min.min(y);
    }
    v - left_min.max(right_min)
}

fn envelope_slope(peaks: &[usize], centers: &[f64], y: &[f64], floor: f64, tau0: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = peaks
        .iter()
        .filter(|&&i| y[i] > floor)
        .map(|&i| ((centers[i] - tau0).abs(), (y[i] - floor).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    (slope < 0.0).then_some(-slope)
}

/// Linear-interpolated delay where `y` first drops below `level` walking
/// from `start` in direction `dir`.
fn crossing(y: &[f64], x: &[f64], start: usize, level: f64, dir: isize) -> f64 {
    let mut i = start as isize;
    loop {
        let next = i + dir;
        if next < 0 || next as usize >= y.len() {
            return x[i as usize];
        }
        let (a, b) = (i as usize, next as usize);
        if y[b] < level {
            let frac = (y[a] - level) / (y[a] - y[b]);
            return x[a] + frac * (x[b] - x[a]);
        }
        i = next;
    }
}
