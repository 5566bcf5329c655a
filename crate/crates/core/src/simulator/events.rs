use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::config::{Detector, DetectorConfig, EmissionConfig, EventRecord};
use super::sampler::PairDelaySampler;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Length of one independently seeded time slice. Fixed so the random
/// streams, and hence the output, do not depend on the worker count.
pub const SLICE_SECONDS: f64 = 1e-3;

/// Poisson pair emission over `[0, duration)`, beamsplitter routing,
/// efficiency thinning and detector jitter. Returns detector clicks sorted by
/// `(timestamp, detector)`; clicks outside the acquisition are dropped.
pub fn generate_events(
    emission: &EmissionConfig,
    detectors: &[DetectorConfig; 2],
    exec: Execution,
) -> Result<Vec<EventRecord>> {
    emission.validate()?;
    for d in detectors {
        d.validate()?;
    }
    let sampler = PairDelaySampler::new(&emission.opo)?;
    let inter_arrival = Exp::new(emission.pair_rate)
        .map_err(|e| Error::invalid(format!("pair rate: {e}")))?;

    let n_slices = (emission.duration / SLICE_SECONDS).ceil().max(1.0) as usize;
    let slices = exec.map_indices(n_slices, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(emission.seed);
        rng.set_stream(s as u64);
        let start = s as f64 * SLICE_SECONDS;
        let end = ((s + 1) as f64 * SLICE_SECONDS).min(emission.duration);
        slice_events(&mut rng, start, end, emission.duration, &sampler, &inter_arrival, detectors)
    });

    let mut events: Vec<EventRecord> = slices.into_iter().flatten().collect();
    exec.sort_by(&mut events, |a, b| {
        a.timestamp.total_cmp(&b.timestamp).then(a.detector.cmp(&b.detector))
    });
    Ok(events)
}

fn slice_events(
    rng: &mut ChaCha8Rng,
    start: f64,
    end: f64,
    duration: f64,
    sampler: &PairDelaySampler,
    inter_arrival: &Exp<f64>,
    detectors: &[DetectorConfig; 2],
) -> Vec<EventRecord> {
    let mut out = Vec::new();
    let mut birth = start;
    loop {
        birth += inter_arrival.sample(rng);
        if birth >= end {
            break;
        }
        // Each photon picks an output port, then survives detection or not.
        let route = |rng: &mut ChaCha8Rng| {
            let det = if rng.random::<bool>() { Detector::One } else { Detector::Two };
            let seen = rng.random::<f64>() < detectors[det.index()].efficiency;
            (det, seen)
        };
        let first = route(rng);
        let second = route(rng);
        if !first.1 && !second.1 {
            continue;
        }
        let delay = sampler.sample(rng);
        for (det, seen, offset) in [(first.0, first.1, -0.5 * delay), (second.0, second.1, 0.5 * delay)] {
            if !seen {
                continue;
            }
            let t = birth + offset + detectors[det.index()].jitter.sample(rng);
            if (0.0..duration).contains(&t) {
                out.push(EventRecord {
                    detector: det,
                    timestamp: t,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{JitterModel, OpoParams};
    use std::f64::consts::PI;

    fn setup(rate: f64, duration: f64, eff: f64) -> (EmissionConfig, [DetectorConfig; 2]) {
        let opo = OpoParams::from_cavity(2.0 * PI * 11e6, 0.7, 2.07e-9, 1e-2, 20).unwrap();
        let det = DetectorConfig::new(JitterModel::new(285e-12).unwrap(), eff).unwrap();
        (
            EmissionConfig {
                pair_rate: rate,
                opo,
                duration,
                seed: 99,
            },
            [det, det],
        )
    }

    #[test]
    fn sorted_and_inside_acquisition() {
        let (e, d) = setup(1e6, 5e-3, 1.0);
        let ev = generate_events(&e, &d, Execution::Sequential).unwrap();
        assert!(ev.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        assert!(ev.iter().all(|x| x.timestamp >= 0.0 && x.timestamp < e.duration));
    }

    #[test]
    fn photon_count_matches_rate() {
        let (e, d) = setup(2e6, 10e-3, 0.5);
        let ev = generate_events(&e, &d, Execution::Sequential).unwrap();
        // 2 photons per pair, thinned by 0.5: mean R T
        let mean = e.pair_rate * e.duration;
        let sd = mean.sqrt() * 2.0;
        assert!((ev.len() as f64 - mean).abs() < 5.0 * sd, "{} vs {mean}", ev.len());
        let ones = ev.iter().filter(|x| x.detector == Detector::One).count() as f64;
        assert!((ones / ev.len() as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let (e, d) = setup(1e6, 7.5e-3, 1.0);
        let a = generate_events(&e, &d, Execution::Sequential).unwrap();
        let b = generate_events(&e, &d, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seed_changes_output() {
        let (mut e, d) = setup(1e6, 2e-3, 1.0);
        let a = generate_events(&e, &d, Execution::Parallel).unwrap();
        e.seed += 1;
        let b = generate_events(&e, &d, Execution::Parallel).unwrap();
        assert_ne!(a, b);
    }
}
