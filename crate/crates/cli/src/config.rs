//! Run configuration in boundary units (ns, ps, MHz). Loaded from TOML;
//! every field has a default so a file only needs the keys it changes.

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use opocomb::correlation::{CoincidenceModelParams, JitterModel, OpoParams};
use opocomb::fitter::{Param, Weighting};
use opocomb::simulator::{Detector, DetectorConfig, EmissionConfig, TacConfig};
use opocomb::units::{angular_to_mhz, mhz_to_angular, ns, ps, to_ns, to_ps};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub opo: OpoSection,
    pub source: SourceSection,
    pub detectors: DetectorSection,
    pub tac: TacSection,
    pub model: ModelSection,
    pub eval: EvalSection,
    pub fit: FitSection,
    pub loss: LossSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            opo: OpoSection::default(),
            source: SourceSection::default(),
            detectors: DetectorSection::default(),
            tac: TacSection::default(),
            model: ModelSection::default(),
            eval: EvalSection::default(),
            fit: FitSection::default(),
            loss: LossSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpoSection {
    pub omega_c_mhz: f64,
    pub tau_f_ns: f64,
    /// `F / F0`, the output-coupler share of the cavity loss.
    pub escape_efficiency: f64,
    /// `2 epsilon / omega_c` at `pump_scale = 1`.
    pub threshold_ratio: f64,
    pub n_modes_half: u32,
}

impl Default for OpoSection {
    fn default() -> Self {
        Self {
            omega_c_mhz: 11.0,
            tau_f_ns: 2.07,
            escape_efficiency: 0.70,
            threshold_ratio: 0.1,
            n_modes_half: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSection {
    /// Pair rate at `pump_scale = 1`, 1/s.
    pub pair_rate_hz: f64,
    /// Pump power relative to the reference. Scales the pair rate linearly
    /// and the parametric gain as its square root.
    pub pump_scale: f64,
    pub duration_s: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            pair_rate_hz: 2.91e6,
            pump_scale: 1.0,
            duration_s: 22.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSection {
    pub t_r1_ps: f64,
    pub t_r2_ps: f64,
    pub efficiency1: f64,
    pub efficiency2: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            t_r1_ps: 285.0,
            t_r2_ps: 285.0,
            efficiency1: 0.1,
            efficiency2: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TacSection {
    pub tau0_ns: f64,
    pub bin_width_ps: f64,
    pub window_start_ns: f64,
    pub window_stop_ns: f64,
    pub start_channel: u8,
}

impl Default for TacSection {
    fn default() -> Self {
        let t = TacConfig::default();
        Self {
            tau0_ns: to_ns(t.electronic_delay),
            bin_width_ps: to_ps(t.bin_width),
            window_start_ns: to_ns(t.window_start),
            window_stop_ns: to_ns(t.window_stop),
            start_channel: t.start_channel.id(),
        }
    }
}

/// Coincidence-model parameters: curve for `eval --model coincidence`, and
/// an optional starting point for `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub tau_f_ns: f64,
    pub t_r_ps: f64,
    pub omega_c_mhz: f64,
    pub c1: f64,
    pub c2: f64,
    pub tau0_ns: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            tau_f_ns: 2.07,
            t_r_ps: 285.0,
            omega_c_mhz: 11.0,
            c1: 1446.0,
            c2: 0.067,
            tau0_ns: 39.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CurveModel {
    /// Pair correlation of the cavity output, ideal detectors.
    Gamma,
    /// Pair correlation averaged over both detectors' timing jitter.
    GammaBar,
    /// Closed-form coincidence-count model.
    Coincidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub model: CurveModel,
    pub from_ns: f64,
    pub to_ns: f64,
    pub step_ns: f64,
    /// Relative tolerance of the jitter-average quadrature.
    pub rel_tol: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            model: CurveModel::Coincidence,
            from_ns: 0.0,
            to_ns: 50.0,
            step_ns: 0.01,
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingName {
    Poisson,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub weighting: WeightingName,
    /// Names from `tau_f, t_r, omega_c, c1, c2, tau0`.
    pub freeze: Vec<String>,
    pub max_iter: usize,
    pub multi_start: bool,
    /// Start from `[model]` instead of the automatic guess.
    pub use_model_guess: bool,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            weighting: WeightingName::Poisson,
            freeze: Vec::new(),
            max_iter: 200,
            multi_start: true,
            use_model_guess: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    /// Output-coupler transmittance.
    pub t_oc: f64,
}

impl Default for LossSection {
    fn default() -> Self {
        Self { t_oc: 0.10 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serialises")
    }

    pub fn opo_params(&self) -> Result<OpoParams> {
        let o = &self.opo;
        let ratio = o.threshold_ratio * self.source.pump_scale.sqrt();
        Ok(OpoParams::from_cavity(
            mhz_to_angular(o.omega_c_mhz),
            o.escape_efficiency,
            ns(o.tau_f_ns),
            ratio,
            o.n_modes_half,
        )?)
    }

    pub fn emission(&self) -> Result<EmissionConfig> {
        let s = &self.source;
        if !(s.pump_scale > 0.0) {
            bail!(opocomb::Error::InvalidParams(format!("pump_scale must be positive, got {}", s.pump_scale)));
        }
        let e = EmissionConfig {
            pair_rate: s.pair_rate_hz * s.pump_scale,
            opo: self.opo_params()?,
            duration: s.duration_s,
            seed: self.seed,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn detectors(&self) -> Result<[DetectorConfig; 2]> {
        let d = &self.detectors;
        Ok([
            DetectorConfig::new(JitterModel::new(ps(d.t_r1_ps))?, d.efficiency1)?,
            DetectorConfig::new(JitterModel::new(ps(d.t_r2_ps))?, d.efficiency2)?,
        ])
    }

    pub fn tac(&self) -> Result<TacConfig> {
        let t = &self.tac;
        let c = TacConfig {
            electronic_delay: ns(t.tau0_ns),
            bin_width: ps(t.bin_width_ps),
            window_start: ns(t.window_start_ns),
            window_stop: ns(t.window_stop_ns),
            start_channel: Detector::from_id(t.start_channel)?,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn model_params(&self) -> Result<CoincidenceModelParams> {
        let m = &self.model;
        Ok(CoincidenceModelParams::new(
            ns(m.tau_f_ns),
            ps(m.t_r_ps),
            mhz_to_angular(m.omega_c_mhz),
            m.c1,
            m.c2,
            ns(m.tau0_ns),
        )?)
    }

    pub fn weighting(&self) -> Weighting {
        match self.fit.weighting {
            WeightingName::Poisson => Weighting::Poisson,
            WeightingName::Uniform => Weighting::Uniform,
        }
    }

    pub fn frozen(&self) -> Result<Vec<Param>> {
        self.fit.freeze.iter().map(|s| param_by_key(s)).collect()
    }
}

/// Report keys for each parameter, in boundary units.
pub fn param_key(p: Param) -> &'static str {
    match p {
        Param::TauF => "tau_f_ns",
        Param::TR => "t_r_ps",
        Param::OmegaC => "omega_c_mhz",
        Param::C1 => "c1",
        Param::C2 => "c2",
        Param::Tau0 => "tau0_ns",
    }
}

fn param_by_key(s: &str) -> Result<Param> {
    let short = s.trim_end_matches("_ns").trim_end_matches("_ps").trim_end_matches("_mhz");
    Ok(match short {
        "tau_f" => Param::TauF,
        "t_r" => Param::TR,
        "omega_c" => Param::OmegaC,
        "c1" => Param::C1,
        "c2" => Param::C2,
        "tau0" => Param::Tau0,
        _ => bail!(opocomb::Error::InvalidParams(format!(
            "unknown parameter {s:?} in fit.freeze (expected tau_f, t_r, omega_c, c1, c2 or tau0)"
        ))),
    })
}

/// Internal SI value to boundary units.
pub fn to_boundary(p: Param, v: f64) -> f64 {
    match p {
        Param::TauF | Param::Tau0 => to_ns(v),
        Param::TR => to_ps(v),
        Param::OmegaC => angular_to_mhz(v),
        Param::C1 | Param::C2 => v,
    }
}
