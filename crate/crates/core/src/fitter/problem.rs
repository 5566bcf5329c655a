use crate::correlation::CoincidenceModelParams;
use crate::error::{Error, Result};
use crate::histogram::Histogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    TauF,
    TR,
    OmegaC,
    C1,
    C2,
    Tau0,
}

impl Param {
    pub const ALL: [Param; 6] = [Param::TauF, Param::TR, Param::OmegaC, Param::C1, Param::C2, Param::Tau0];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::TauF => "tau_F",
            Param::TR => "T_R",
            Param::OmegaC => "omega_c",
            Param::C1 => "C1",
            Param::C2 => "C2",
            Param::Tau0 => "tau0",
        }
    }

    /// Fitted on a log scale (strictly positive parameters).
    pub(crate) fn is_log(self) -> bool {
        matches!(self, Param::TauF | Param::TR | Param::OmegaC | Param::C1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// `w = 1 / max(counts, 1)`.
    #[default]
    Poisson,
    Uniform,
}

/// Data plus everything the optimiser needs to know about it.
#[derive(Debug, Clone)]
pub struct FitProblem {
    centers: Vec<f64>,
    counts: Vec<f64>,
    pub weighting: Weighting,
    pub free: [bool; 6],
    pub bounds: [(f64, f64); 6],
    pub max_iter: usize,
    /// Minimum half-width of the comb sum; it extends itself as needed.
    pub n_window: u32,
    /// Also start from [`super::initial_guess_from_samples`] and keep the
    /// better optimum.
    pub multi_start: bool,
}

impl FitProblem {
    pub fn from_histogram(h: &Histogram) -> Result<Self> {
        Self::from_samples(h.bin_centers(), h.counts_f64())
    }

    /// Arbitrary (possibly non-integer) data at the given delays.
    pub fn from_samples(centers: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if centers.len() != counts.len() {
            return Err(Error::invalid("centers and counts differ in length"));
        }
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::invalid("counts must be finite and non-negative"));
        }
        let nonzero = counts.iter().filter(|&&c| c > 0.0).count();
        if nonzero < 20 {
            return Err(Error::InsufficientData(format!(
                "{nonzero} bins with nonzero counts, need at least 20"
            )));
        }
        Ok(Self {
            centers,
            counts,
            weighting: Weighting::Poisson,
            free: [true; 6],
            bounds: default_bounds(),
            max_iter: 200,
            n_window: 1,
            multi_start: true,
        })
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn with_weighting(mut self, w: Weighting) -> Self {
        self.weighting = w;
        self
    }

    /// Hold `p` at its starting value.
    pub fn freeze(mut self, p: Param) -> Self {
        self.free[p.index()] = false;
        self
    }

    pub fn with_bounds(mut self, p: Param, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::invalid(format!("bounds for {} need lo < hi", p.name())));
        }
        self.bounds[p.index()] = (lo, hi);
        Ok(self)
    }

    pub fn n_free(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    pub(crate) fn weights(&self) -> Vec<f64> {
        match self.weighting {
            Weighting::Poisson => self.counts.iter().map(|&c| 1.0 / c.max(1.0)).collect(),
            Weighting::Uniform => vec![1.0; self.counts.len()],
        }
    }

    pub(crate) fn check_guess(&self, g: &CoincidenceModelParams) -> Result<()> {
        g.validate()?;
        for (p, v) in Param::ALL.iter().zip(g.to_array()) {
            let (lo, hi) = self.bounds[p.index()];
            if v < lo || v > hi {
                return Err(Error::invalid(format!(
                    "starting value {v} for {} outside bounds [{lo}, {hi}]",
                    p.name()
                )));
            }
        }
        if self.n_free() == 0 {
            return Err(Error::invalid("no free parameters"));
        }
        if self.len() <= self.n_free() {
            return Err(Error::InsufficientData("fewer bins than free parameters".into()));
        }
        Ok(())
    }
}

fn default_bounds() -> [(f64, f64); 6] {
    let pos = (0.0, f64::INFINITY);
    [pos, pos, pos, pos, (0.0, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_twenty_nonzero_bins() {
        let centers: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mut counts = vec![0.0; 100];
        for c in counts.iter_mut().take(19) {
            *c = 3.0;
        }
        assert!(matches!(
            FitProblem::from_samples(centers.clone(), counts.clone()),
            Err(Error::InsufficientData(_))
        ));
        counts[50] = 1.0;
        assert!(FitProblem::from_samples(centers, counts).is_ok());
    }

    #[test]
    fn bounds_must_be_ordered() {
        let centers: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let p = FitProblem::from_samples(centers, vec![1.0; 30]).unwrap();
        assert!(p.clone().with_bounds(Param::TR, 2.0, 1.0).is_err());
        assert!(p.with_bounds(Param::TR, 1.0, 2.0).is_ok());
    }

    #[test]
    fn poisson_weights_floor_at_one() {
        let centers: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let mut counts = vec![4.0; 25];
        counts[0] = 0.0;
        let p = FitProblem::from_samples(centers, counts).unwrap();
        let w = p.weights();
        assert_eq!(w[0], 1.0);
        assert_eq!(w[1], 0.25);
    }
}
