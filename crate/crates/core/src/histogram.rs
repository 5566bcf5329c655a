use crate::error::{Error, Result};

/// Uniformly binned counts over delay. Bin `i` covers
/// `[origin + i w, origin + (i + 1) w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    origin: f64,
    bin_width: f64,
    counts: Vec<u64>,
    /// Free-form acquisition metadata, kept in insertion order.
    pub meta: Vec<(String, String)>,
}

impl Histogram {
    pub fn new(origin: f64, bin_width: f64, counts: Vec<u64>) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::invalid(format!("bin width must be positive, got {bin_width}")));
        }
        if !origin.is_finite() {
            return Err(Error::invalid("histogram origin must be finite"));
        }
        Ok(Self {
            origin,
            bin_width,
            counts,
            meta: Vec::new(),
        })
    }

    pub fn zeros(origin: f64, bin_width: f64, n_bins: usize) -> Result<Self> {
        Self::new(origin, bin_width, vec![0; n_bins])
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.bin_width
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    /// `len() + 1` edges.
    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.len())
            .map(|i| self.origin + i as f64 * self.bin_width)
            .collect()
    }

    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    /// Same counts on a delay axis moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            origin: self.origin + delta,
            ..self.clone()
        }
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.meta.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key, value)),
        }
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [u64] {
        &mut self.counts
    }

    /// Bin-wise sum. Binning must agree exactly.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.origin != other.origin || self.bin_width != other.bin_width || self.len() != other.len() {
            return Err(Error::invalid("cannot merge histograms with different binning"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}
