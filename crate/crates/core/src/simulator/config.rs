use crate::correlation::{JitterModel, OpoParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Detector {
    One,
    Two,
}

impl Detector {
    pub fn id(self) -> u8 {
        match self {
            Detector::One => 1,
            Detector::Two => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Detector::One),
            2 => Ok(Detector::Two),
            other => Err(Error::invalid(format!("detector id must be 1 or 2, got {other}"))),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Detector::One => Detector::Two,
            Detector::Two => Detector::One,
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

/// Pair source. `pair_rate` is proportional to pump power (and to eps^2);
/// the simulator takes it directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionConfig {
    pub pair_rate: f64,
    pub opo: OpoParams,
    pub duration: f64,
    pub seed: u64,
}

impl EmissionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pair_rate > 0.0 && self.pair_rate.is_finite()) {
            return Err(Error::invalid(format!("pair rate must be positive, got {}", self.pair_rate)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(format!("duration must be positive, got {}", self.duration)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub jitter: JitterModel,
    pub efficiency: f64,
}

impl DetectorConfig {
    pub fn new(jitter: JitterModel, efficiency: f64) -> Result<Self> {
        let d = Self { jitter, efficiency };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::invalid(format!(
                "detector efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        Ok(())
    }
}

/// Start–stop converter. A start-channel event opens the TAC; the first
/// stop-channel event whose delayed arrival `t_stop + electronic_delay`
/// falls in `[window_start, window_stop)` after it is converted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TacConfig {
    pub electronic_delay: f64,
    pub bin_width: f64,
    pub window_start: f64,
    pub window_stop: f64,
    pub start_channel: Detector,
}

impl Default for TacConfig {
    fn default() -> Self {
        Self {
            electronic_delay: 39e-9,
            bin_width: 50e-12,
            window_start: 0.0,
            window_stop: 50e-9,
            start_channel: Detector::One,
        }
    }
}

impl TacConfig {
    pub fn stop_channel(&self) -> Detector {
        self.start_channel.other()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::invalid(format!("bin width must be positive, got {}", self.bin_width)));
        }
        if !(self.window_start >= 0.0 && self.window_start < self.window_stop && self.window_stop.is_finite()) {
            return Err(Error::invalid(format!(
                "TAC window must satisfy 0 <= start < stop, got [{}, {})",
                self.window_start, self.window_stop
            )));
        }
        if !self.electronic_delay.is_finite() {
            return Err(Error::invalid("electronic delay must be finite"));
        }
        self.n_bins().map(|_| ())
    }

    /// The window must hold a whole number of bins (to 1e-9 relative).
    pub fn n_bins(&self) -> Result<usize> {
        let exact = (self.window_stop - self.window_start) / self.bin_width;
        let n = exact.round();
        if n < 1.0 || ((exact - n) / n).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "window length is not a whole number of bins ({exact} bins)"
            )));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub detector: Detector,
    /// Seconds from the start of the acquisition.
    pub timestamp: f64,
}
