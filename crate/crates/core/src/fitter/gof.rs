use statrs::distribution::{ContinuousCDF, Normal};

use super::lm::FitResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    pub reduced_chi2: f64,
    /// Two-sided p-value of the Wald–Wolfowitz runs test on residual signs.
    /// `1.0` when there are too few signed residuals to test.
    pub runs_p_value: f64,
    pub n_runs: usize,
    pub max_abs_standardized_residual: f64,
    pub max_residual_bin: usize,
}

/// Normal approximation to the runs distribution. Zero residuals are skipped.
fn runs_test(residuals: &[f64]) -> (usize, f64) {
    let signs: Vec<bool> = residuals.iter().filter(|r| **r != 0.0).map(|r| *r > 0.0).collect();
    let n_pos = signs.iter().filter(|&&s| s).count() as f64;
    let n_neg = signs.len() as f64 - n_pos;
    let runs = if signs.is_empty() {
        0
    } else {
        1 + signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    if n_pos < 1.0 || n_neg < 1.0 {
        return (runs, 1.0);
    }
    let n = n_pos + n_neg;
    let mean = 2.0 * n_pos * n_neg / n + 1.0;
    let var = (mean - 1.0) * (mean - 2.0) / (n - 1.0);
    if !(var > 0.0) {
        return (runs, 1.0);
    }
    let z = (runs as f64 - mean) / var.sqrt();
    let p = 2.0 * Normal::standard().cdf(-z.abs());
    (runs, p.min(1.0))
}

pub fn goodness_of_fit(r: &FitResult) -> GoodnessOfFit {
    let (n_runs, runs_p_value) = runs_test(&r.standardized_residuals);
    let (max_residual_bin, max_abs) = r
        .standardized_residuals
        .iter()
        .map(|v| v.abs())
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    GoodnessOfFit {
        reduced_chi2: r.reduced_chi2,
        runs_p_value,
        n_runs,
        max_abs_standardized_residual: max_abs,
        max_residual_bin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{coincidence_model, CoincidenceModelParams};
    use crate::fitter::{fit, FitProblem, Param};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson};
    use std::f64::consts::PI;

    fn centers() -> Vec<f64> {
        (0..1000).map(|i| (i as f64 + 0.5) * 50e-12).collect()
    }

    fn truth() -> CoincidenceModelParams {
        CoincidenceModelParams::new(2.07e-9, 285e-12, 2.0 * PI * 11e6, 1446.0, 0.067, 39e-9).unwrap()
    }

    fn poisson(mu: impl Iterator<Item = f64>, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        mu.map(|m| Poisson::new(m).unwrap().sample(&mut rng)).collect()
    }

    #[test]
    fn runs_test_on_known_sequences() {
        let alternating: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let (runs, p) = runs_test(&alternating);
        assert_eq!(runs, 100);
        assert!(p < 1e-6);
        let blocks: Vec<f64> = (0..100).map(|i| if i < 50 { 1.0 } else { -1.0 }).collect();
        let (runs, p) = runs_test(&blocks);
        assert_eq!(runs, 2);
        assert!(p < 1e-6);
        assert_eq!(runs_test(&[1.0, 2.0, 3.0]).1, 1.0);
    }

    #[test]
    fn correct_model_passes() {
        let m = truth();
        let c = centers();
        let y = poisson(c.iter().map(|&t| coincidence_model(&m, t, 1)), 11);
        let p = FitProblem::from_samples(c, y).unwrap();
        let r = fit(&p, &m).unwrap();
        let g = goodness_of_fit(&r);
        assert!(r.dof >= 200);
        assert!((0.8..=1.2).contains(&g.reduced_chi2), "{}", g.reduced_chi2);
        assert!(g.runs_p_value > 0.001, "{}", g.runs_p_value);
        assert!(g.max_abs_standardized_residual < 5.0);
    }

    #[test]
    fn structure_mismatch_is_flagged() {
        // Smooth exponential bump with no comb, fit by the comb model with
        // its peak spacing and width frozen.
        let c = centers();
        let y = poisson(c.iter().map(|&t| 100.0 + 300.0 * (-(t - 25e-9f64).abs() / 8e-9).exp()), 12);
        let p = FitProblem::from_samples(c, y)
            .unwrap()
            .freeze(Param::TauF)
            .freeze(Param::TR);
        let mut start = truth();
        start.tau0 = 25e-9;
        start.c1 = 300.0;
        start.c2 = 0.3;
        start.omega_c = 1.0 / 8e-9;
        let r = fit(&p, &start).unwrap();
        let g = goodness_of_fit(&r);
        assert!(g.runs_p_value < 0.01, "{}", g.runs_p_value);
    }

    #[test]
    fn exact_fit_has_zero_statistics() {
        let m = truth();
        let c = centers();
        let y: Vec<f64> = c.iter().map(|&t| coincidence_model(&m, t, 1)).collect();
        let r = fit(&FitProblem::from_samples(c, y).unwrap(), &m).unwrap();
        let g = goodness_of_fit(&r);
        assert_eq!(g.reduced_chi2, 0.0);
        assert_eq!(g.max_abs_standardized_residual, 0.0);
    }
}
