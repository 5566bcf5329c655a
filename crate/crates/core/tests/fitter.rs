use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use opocomb::correlation::{coincidence_model, CoincidenceModelParams};
use opocomb::fitter::{fit, initial_guess_from_samples, FitProblem, Param};

fn truth() -> CoincidenceModelParams {
    CoincidenceModelParams::new(2.07e-9, 285e-12, 2.0 * PI * 11e6, 1446.0, 0.067, 39e-9).unwrap()
}

fn centers(offset: f64) -> Vec<f64> {
    (0..1000).map(|i| offset + (i as f64 + 0.5) * 50e-12).collect()
}

fn poisson_data(m: &CoincidenceModelParams, c: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    c.iter()
        .map(|&t| Poisson::new(coincidence_model(m, t, 1)).unwrap().sample(&mut rng))
        .collect()
}

#[test]
fn translation_moves_only_the_delay() {
    let m = truth();
    let c = centers(0.0);
    let y = poisson_data(&m, &c, 31);
    let a = fit(&FitProblem::from_samples(c.clone(), y.clone()).unwrap(), &m).unwrap();

    let shift = 5e-9;
    let shifted = CoincidenceModelParams { tau0: m.tau0 + shift, ..m };
    let c2: Vec<f64> = c.iter().map(|t| t + shift).collect();
    let b = fit(&FitProblem::from_samples(c2, y).unwrap(), &shifted).unwrap();

    assert!((b.params.tau0 - a.params.tau0 - shift).abs() < 1e-12);
    for p in [Param::TauF, Param::TR, Param::OmegaC, Param::C1, Param::C2] {
        let (x, z) = (a.params.to_array()[p.index()], b.params.to_array()[p.index()]);
        assert!(((x - z) / x).abs() < 1e-6, "{}: {x} vs {z}", p.name());
    }
}

/// At least 80% of replicate fits land within 2 sigma of the truth on each
/// shape parameter.
#[test]
fn two_sigma_coverage_over_replicates() {
    let m = truth();
    let c = centers(0.0);
    let inside: Vec<[bool; 6]> = (0..30u64)
        .into_par_iter()
        .map(|seed| {
            let y = poisson_data(&m, &c, 1000 + seed);
            let p = FitProblem::from_samples(c.clone(), y).unwrap();
            let g = initial_guess_from_samples(p.centers(), p.counts()).unwrap();
            let r = fit(&p, &g).unwrap();
            std::array::from_fn(|i| {
                let p = Param::ALL[i];
                (r.params.to_array()[i] - m.to_array()[i]).abs() < 2.0 * r.uncertainty(p)
            })
        })
        .collect();
    for p in Param::ALL {
        let hits = inside.iter().filter(|v| v[p.index()]).count();
        assert!(hits >= 24, "{}: {hits}/30 within 2 sigma", p.name());
    }
}

#[test]
fn residuals_are_data_minus_model() {
    let m = truth();
    let c = centers(0.0);
    let y = poisson_data(&m, &c, 32);
    let r = fit(&FitProblem::from_samples(c.clone(), y.clone()).unwrap(), &m).unwrap();
    for ((t, obs), res) in c.iter().zip(&y).zip(&r.residuals) {
        let model = coincidence_model(&r.params, *t, 1);
        assert!((obs - model - res).abs() <= 1e-12 * obs.max(1.0));
    }
    for (res, z) in r.residuals.iter().zip(&r.standardized_residuals) {
        assert!(res.signum() == z.signum() || *res == 0.0);
    }
}
