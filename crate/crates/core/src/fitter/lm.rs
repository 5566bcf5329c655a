use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::guess::initial_guess_from_samples;
use super::problem::{FitProblem, Param};
use crate::correlation::{coincidence_model, CoincidenceModelParams};
use crate::error::{Error, Result};

const PARAM_TOL: f64 = 1e-8;
const COST_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-6;
const MIN_EIGEN_RATIO: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: CoincidenceModelParams,
    /// In natural units, ordered as [`Param::ALL`]. Rows and columns of
    /// frozen parameters are zero.
    pub covariance: [[f64; 6]; 6],
    pub reduced_chi2: f64,
    /// Weighted sum of squared residuals.
    pub cost: f64,
    pub dof: usize,
    pub n_iterations: usize,
    pub converged: bool,
    /// `counts - model` per bin.
    pub residuals: Vec<f64>,
    /// Residuals times `sqrt(weight)`.
    pub standardized_residuals: Vec<f64>,
    pub free: [bool; 6],
}

impl FitResult {
    pub fn uncertainty(&self, p: Param) -> f64 {
        self.covariance[p.index()][p.index()].max(0.0).sqrt()
    }
}

/// Internal coordinates: logs of the positive parameters, `C2` and `tau0`
/// as they are.
fn to_internal(m: &CoincidenceModelParams) -> [f64; 6] {
    let mut x = m.to_array();
    for p in Param::ALL {
        if p.is_log() {
            x[p.index()] = x[p.index()].ln();
        }
    }
    x
}

fn from_internal(x: &[f64; 6], frozen: &[Option<f64>; 6]) -> CoincidenceModelParams {
    let mut v = *x;
    for p in Param::ALL {
        let i = p.index();
        v[i] = match frozen[i] {
            Some(exact) => exact,
            None if p.is_log() => v[i].exp(),
            None => v[i],
        };
    }
    CoincidenceModelParams::from_array(v)
}

struct Evaluator<'a> {
    problem: &'a FitProblem,
    sqrt_w: Vec<f64>,
    lo: [f64; 6],
    hi: [f64; 6],
    /// Natural values of frozen parameters, so they never pass through a log.
    frozen: [Option<f64>; 6],
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a FitProblem, guess: &CoincidenceModelParams) -> Self {
        let mut lo = [0.0; 6];
        let mut hi = [0.0; 6];
        for p in Param::ALL {
            let (l, h) = problem.bounds[p.index()];
            if p.is_log() {
                lo[p.index()] = if l > 0.0 { l.ln() } else { f64::NEG_INFINITY };
                hi[p.index()] = h.ln();
            } else {
                lo[p.index()] = l;
                hi[p.index()] = h;
            }
        }
        Self {
            problem,
            sqrt_w: problem.weights().iter().map(|w| w.sqrt()).collect(),
            lo,
            hi,
            frozen: std::array::from_fn(|i| (!problem.free[i]).then(|| guess.to_array()[i])),
        }
    }

    fn params(&self, x: &[f64; 6]) -> CoincidenceModelParams {
        from_internal(x, &self.frozen)
    }

    fn residuals(&self, m: &CoincidenceModelParams) -> Vec<f64> {
        self.problem
            .centers()
            .iter()
            .zip(self.problem.counts())
            .zip(&self.sqrt_w)
            .map(|((&t, &y), &sw)| sw * (y - coincidence_model(m, t, self.problem.n_window)))
            .collect()
    }

    fn clamp(&self, x: &mut [f64; 6]) {
        for i in 0..6 {
            x[i] = x[i].clamp(self.lo[i], self.hi[i]);
        }
    }

    /// Scale against which internal changes are judged relative.
    fn scale(x: &[f64; 6], i: usize) -> f64 {
        if Param::ALL[i].is_log() {
            1.0
        } else if i == Param::Tau0.index() {
            x[i].abs().max(x[Param::TauF.index()].exp())
        } else {
            x[i].abs().max(1e-9)
        }
    }

    /// Central-difference Jacobian of the weighted residuals with respect to
    /// the free internal coordinates.
    fn jacobian(&self, x: &[f64; 6], free: &[usize]) -> DMatrix<f64> {
        let n = self.problem.len();
        let mut j = DMatrix::zeros(n, free.len());
        for (col, &i) in free.iter().enumerate() {
            let h = FD_STEP * Self::scale(x, i);
            let mut up = *x;
            let mut dn = *x;
            up[i] += h;
            dn[i] -= h;
            let ru = self.residuals(&self.params(&up));
            let rd = self.residuals(&self.params(&dn));
            for row in 0..n {
                j[(row, col)] = (ru[row] - rd[row]) / (2.0 * h);
            }
        }
        j
    }
}

struct Outcome {
    params: CoincidenceModelParams,
    x: [f64; 6],
    cost: f64,
    residuals: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn run(ev: &Evaluator<'_>, start: &CoincidenceModelParams, free: &[usize]) -> Result<Outcome> {
    let mut params = *start;
    let mut x = to_internal(start);
    let mut residuals = ev.residuals(&params);
    let mut cost = cost_of(&residuals);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = cost == 0.0;

    while !converged && iterations < ev.problem.max_iter {
        iterations += 1;
        let j = ev.jacobian(&x, free);
        let r = DVector::from_column_slice(&residuals);
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * r;
        if let Some(c) = (0..free.len()).find(|&c| jtj[(c, c)] == 0.0) {
            return Err(Error::SingularNormalMatrix(format!(
                "{} does not affect the model",
                Param::ALL[free[c]].name()
            )));
        }

        loop {
            let mut damped = jtj.clone();
            for c in 0..free.len() {
                damped[(c, c)] += lambda * jtj[(c, c)];
            }
            let step = match damped.cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => {
                    lambda *= 4.0;
                    if lambda > 1e20 {
                        return Err(Error::SingularNormalMatrix("damped normal matrix not positive definite".into()));
                    }
                    continue;
                }
            };

            let mut trial = x;
            for (c, &i) in free.iter().enumerate() {
                trial[i] += step[c];
            }
            ev.clamp(&mut trial);
            let rel_change = free
                .iter()
                .map(|&i| (trial[i] - x[i]).abs() / Evaluator::scale(&x, i))
                .fold(0.0, f64::max);

            let trial_params = ev.params(&trial);
            let trial_res = ev.residuals(&trial_params);
            let trial_cost = cost_of(&trial_res);
            if trial_cost < cost {
                let drop = (cost - trial_cost) / cost;
                x = trial;
                params = trial_params;
                residuals = trial_res;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                if drop < COST_TOL || rel_change < PARAM_TOL || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            if rel_change < PARAM_TOL {
                // Steps have shrunk below resolution without improvement.
                converged = true;
                break;
            }
            lambda *= 4.0;
        }
    }

    Ok(Outcome {
        params,
        x,
        cost,
        residuals,
        iterations,
        converged,
    })
}

/// Damped least-squares fit of the coincidence model starting at `guess`.
///
/// With `problem.multi_start` the data-driven guess is tried as a second
/// start and the lower-cost optimum is kept. Failure to converge within
/// `max_iter` is reported through [`FitResult::converged`], not as an error.
pub fn fit(problem: &FitProblem, guess: &CoincidenceModelParams) -> Result<FitResult> {
    problem.check_guess(guess)?;
    let ev = Evaluator::new(problem, guess);
    let free: Vec<usize> = (0..6).filter(|&i| problem.free[i]).collect();

    let mut outcomes = vec![run(&ev, guess, &free)];
    if problem.multi_start {
        if let Ok(auto) = initial_guess_from_samples(problem.centers(), problem.counts()) {
            let mut start = auto.to_array();
            let fixed = guess.to_array();
            for i in 0..6 {
                if !problem.free[i] {
                    start[i] = fixed[i];
                }
                let (lo, hi) = problem.bounds[i];
                start[i] = start[i].clamp(lo, hi);
            }
            let start = CoincidenceModelParams::from_array(start);
            if start != *guess && start.validate().is_ok() {
                outcomes.push(run(&ev, &start, &free));
            }
        }
    }

    let best = outcomes
        .into_iter()
        .reduce(|a, b| match (a, b) {
            (Ok(a), Ok(b)) => Ok(if b.cost < a.cost { b } else { a }),
            (Ok(a), Err(_)) => Ok(a),
            (Err(_), b) => b,
        })
        .expect("at least one start")?;

    let n = problem.len();
    let dof = n - free.len();
    let reduced_chi2 = best.cost / dof as f64;

    // Covariance from the Gauss–Newton normal matrix at the optimum.
    let j = ev.jacobian(&best.x, &free);
    let jtj = j.transpose() * &j;
    let diag: Vec<f64> = (0..free.len()).map(|c| jtj[(c, c)]).collect();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::SingularNormalMatrix("zero curvature at the optimum".into()));
    }
    let mut corr = jtj.clone();
    for a in 0..free.len() {
        for b in 0..free.len() {
            corr[(a, b)] /= (diag[a] * diag[b]).sqrt();
        }
    }
    let eig = SymmetricEigen::new(corr.clone());
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < MIN_EIGEN_RATIO {
        return Err(Error::SingularNormalMatrix(format!(
            "normal matrix is numerically singular (smallest scaled eigenvalue {min_eig:e})"
        )));
    }
    let corr_inv = corr
        .cholesky()
        .ok_or_else(|| Error::SingularNormalMatrix("normal matrix not positive definite".into()))?
        .inverse();

    let natural = best.params.to_array();
    let jacobian_of_map = |i: usize| if Param::ALL[i].is_log() { natural[i] } else { 1.0 };
    let mut covariance = [[0.0; 6]; 6];
    for (a, &ia) in free.iter().enumerate() {
        for (b, &ib) in free.iter().enumerate() {
            let c = corr_inv[(a, b)] / (diag[a] * diag[b]).sqrt() * reduced_chi2;
            covariance[ia][ib] = c * jacobian_of_map(ia) * jacobian_of_map(ib);
        }
    }
    for a in 0..6 {
        for b in (a + 1)..6 {
            let s = 0.5 * (covariance[a][b] + covariance[b][a]);
            covariance[a][b] = s;
            covariance[b][a] = s;
        }
    }

    let weights = problem.weights();
    let residuals: Vec<f64> = best
        .residuals
        .iter()
        .zip(&weights)
        .map(|(r, w)| r / w.sqrt())
        .collect();

    Ok(FitResult {
        params: best.params,
        covariance,
        reduced_chi2,
        cost: best.cost,
        dof,
        n_iterations: best.iterations,
        converged: best.converged,
        residuals,
        standardized_residuals: best.residuals,
        free: problem.free,
    })
}
