use super::config::{EventRecord, TacConfig};
use crate::error::Result;
use crate::exec::Execution;
use crate::histogram::Histogram;

/// Starts processed per work item.
const STARTS_PER_CHUNK: usize = 1 << 15;

/// Single-stop TAC/MCA histogram of start–stop delays
/// `t_stop + electronic_delay - t_start`.
///
/// A start opens the converter only if it is idle; the first stop inside the
/// window converts and the converter stays busy until that stop (or until the
/// window closes if none arrives). Work is split over chunks of starts; each
/// chunk rewinds to a start preceded by a gap longer than the window, where
/// the converter is necessarily idle, so the result equals the sequential
/// scan exactly.
pub fn tac_mca_histogram(events: &[EventRecord], t: &TacConfig, exec: Execution) -> Result<Histogram> {
    t.validate()?;
    let n_bins = t.n_bins()?;
    let mut starts: Vec<f64> = Vec::new();
    let mut stops: Vec<f64> = Vec::new();
    for e in events {
        if e.detector == t.start_channel {
            starts.push(e.timestamp);
        } else {
            stops.push(e.timestamp);
        }
    }
    if !starts.windows(2).all(|w| w[0] <= w[1]) {
        exec.sort_by(&mut starts, f64::total_cmp);
    }
    if !stops.windows(2).all(|w| w[0] <= w[1]) {
        exec.sort_by(&mut stops, f64::total_cmp);
    }

    let n_chunks = starts.len().div_ceil(STARTS_PER_CHUNK);
    let partial = exec.map_indices(n_chunks, |c| {
        let lo = c * STARTS_PER_CHUNK;
        let hi = (lo + STARTS_PER_CHUNK).min(starts.len());
        convert_range(&starts, &stops, lo, hi, t, n_bins)
    });

    let mut h = Histogram::zeros(t.window_start, t.bin_width, n_bins)?;
    let counts = h.counts_mut();
    for p in partial {
        for (a, b) in counts.iter_mut().zip(p) {
            *a += b;
        }
    }
    Ok(h)
}

fn convert_range(starts: &[f64], stops: &[f64], lo: usize, hi: usize, t: &TacConfig, n_bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n_bins];
    if lo >= hi {
        return counts;
    }
    let mut first = lo;
    while first > 0 && starts[first] - starts[first - 1] <= t.window_stop {
        first -= 1;
    }

    let tau0 = t.electronic_delay;
    let mut busy_until = f64::NEG_INFINITY;
    let mut next_stop = stops.partition_point(|&s| s + tau0 - starts[first] < t.window_start);
    for (i, &ts) in starts.iter().enumerate().take(hi).skip(first) {
        if ts <= busy_until {
            continue;
        }
        while next_stop < stops.len() && stops[next_stop] + tau0 - ts < t.window_start {
            next_stop += 1;
        }
        let delay = stops.get(next_stop).map(|&s| s + tau0 - ts);
        match delay {
            Some(d) if d < t.window_stop => {
                if i >= lo {
                    let bin = ((d - t.window_start) / t.bin_width) as usize;
                    counts[bin.min(n_bins - 1)] += 1;
                }
                busy_until = ts + d;
            }
            _ => busy_until = ts + t.window_stop,
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::Detector;

    fn ev(detector: Detector, timestamp: f64) -> EventRecord {
        EventRecord { detector, timestamp }
    }

    fn tac() -> TacConfig {
        TacConfig {
            electronic_delay: 39e-9,
            bin_width: 50e-12,
            window_start: 0.0,
            window_stop: 50e-9,
            start_channel: Detector::One,
        }
    }

    #[test]
    fn single_pair_lands_in_its_bin() {
        let delta = 3.3e-9;
        let events = [ev(Detector::One, 1e-6), ev(Detector::Two, 1e-6 + delta)];
        let h = tac_mca_histogram(&events, &tac(), Execution::Sequential).unwrap();
        assert_eq!(h.total(), 1);
        let bin = ((39e-9 + delta) / 50e-12) as usize;
        assert_eq!(h.counts()[bin], 1);
    }

    #[test]
    fn stops_only_give_empty_histogram() {
        let events: Vec<_> = (0..100).map(|i| ev(Detector::Two, i as f64 * 1e-7)).collect();
        let h = tac_mca_histogram(&events, &tac(), Execution::Sequential).unwrap();
        assert_eq!(h.total(), 0);
        let h = tac_mca_histogram(&[], &tac(), Execution::Sequential).unwrap();
        assert_eq!(h.total(), 0);
        assert_eq!(h.len(), 1000);
    }

    #[test]
    fn first_stop_wins_and_busy_start_ignored() {
        let t = tac();
        // Two stops after one start: only the first converts. A second start
        // while busy is ignored.
        let events = [
            ev(Detector::One, 1e-6),
            ev(Detector::One, 1e-6 + 1e-9),
            ev(Detector::Two, 1e-6 - 30e-9),
            ev(Detector::Two, 1e-6 - 20e-9),
        ];
        let h = tac_mca_histogram(&events, &t, Execution::Sequential).unwrap();
        assert_eq!(h.total(), 1);
        let bin = ((39e-9 - 30e-9) / 50e-12) as usize;
        assert_eq!(h.counts()[bin], 1);
    }

    #[test]
    fn start_after_window_is_accepted() {
        let t = tac();
        let events = [
            ev(Detector::One, 1e-6),
            ev(Detector::One, 1e-6 + 51e-9),
            ev(Detector::Two, 1e-6 + 51e-9 + 1e-9),
        ];
        let h = tac_mca_histogram(&events, &t, Execution::Sequential).unwrap();
        // First start times out (its only stop is past the window), the
        // second converts.
        assert_eq!(h.total(), 1);
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let events = [ev(Detector::Two, 1e-6 + 2e-9), ev(Detector::One, 1e-6), ev(Detector::One, 0.5e-6)];
        let h = tac_mca_histogram(&events, &tac(), Execution::Sequential).unwrap();
        assert_eq!(h.total(), 1);
    }

    #[test]
    fn chunking_matches_a_plain_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        // Dense enough that busy chains cross chunk boundaries.
        let mut events = Vec::new();
        let mut t = 0.0;
        for _ in 0..200_000 {
            t += rng.random::<f64>() * 40e-9;
            let d = if rng.random::<bool>() { Detector::One } else { Detector::Two };
            events.push(ev(d, t));
        }
        let cfg = tac();
        let chunked = tac_mca_histogram(&events, &cfg, Execution::Parallel).unwrap();

        let starts: Vec<f64> = events.iter().filter(|e| e.detector == Detector::One).map(|e| e.timestamp).collect();
        let stops: Vec<f64> = events.iter().filter(|e| e.detector == Detector::Two).map(|e| e.timestamp).collect();
        let plain = convert_range(&starts, &stops, 0, starts.len(), &cfg, 1000);
        assert_eq!(chunked.counts(), plain.as_slice());
        assert!(chunked.total() > 10_000);
    }
}
