use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::gate::{
    derive_gate, EnvelopeShape, GateParams, Transient, PAPER_ACZS_HZ, PAPER_LOOPS, PAPER_MODE_R2_HZ,
    PAPER_MODE_SPACING_HZ, PAPER_QUBIT_HZ, PAPER_RABI_HZ, PAPER_RAMP_TIME,
};
use crate::lindblad::SimulationSettings;
use crate::noise::{all_noise_scenario, NoiseScenario, TABLE1_CHIRP_DURATION, TABLE1_CHIRP_RATE_HZ_PER_US, TABLE1_JITTER_REL_STD};
use crate::readout::{
    DetectionModel, PLACEHOLDER_DEPUMP_PRODUCT, PLACEHOLDER_LAMBDA_BRIGHT, PLACEHOLDER_LAMBDA_DARK, PLACEHOLDER_T_DETECT,
};
use crate::{angular, TWO_PI};

/// Version of the config and report layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Makes an `Option` field mandatory while still accepting `null`.
fn required_option<'de, D, T>(d: D) -> std::result::Result<Option<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Option::<T>::deserialize(d)
}

/// Gate settings in ordinary frequency units (Hz) and seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub rabi_hz: f64,
    pub loops: u32,
    /// `null` selects the loop-closing detuning 2Ω√K.
    #[serde(deserialize_with = "required_option")]
    pub detuning_hz: Option<f64>,
    /// `null` selects the loop-closing time π√K/Ω.
    #[serde(deserialize_with = "required_option")]
    pub gate_time_s: Option<f64>,
    pub aczs_hz: f64,
    pub mode_r2_hz: f64,
    pub mode_spacing_hz: f64,
    pub qubit_hz: f64,
    pub ramp_time_s: f64,
}

/// Noise channels; frequencies in Hz, the chirp rate in Hz/µs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub mode_jitter_rel_std: f64,
    pub chirp_rate_hz_per_us: f64,
    pub chirp_duration_s: f64,
    pub chirp_start_offset_s: f64,
    pub spectator_enabled: bool,
    pub spectator_spacing_hz: f64,
    pub nbar_gate_mode: f64,
    pub nbar_spectator: f64,
    /// Quanta per second.
    pub heating_rate: f64,
    /// 0 disables dephasing.
    pub dephasing_time_s: f64,
    pub aczs_rel_std: f64,
    pub rabi_imbalance: f64,
    pub envelope_shape: EnvelopeShape,
    pub transient: Transient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub fock_cutoff: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `null` derives the cap from the fastest frequency.
    #[serde(deserialize_with = "required_option")]
    pub max_step_s: Option<f64>,
    /// Shots for scenarios with random channels; others run once.
    pub n_shots: usize,
    pub seed: u64,
}

/// Detection model in expected counts per window, plus synthesis sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutConfig {
    pub t_detect_s: f64,
    pub lambda_bright: f64,
    pub lambda_dark: f64,
    /// r·T
    pub depump_product: f64,
    pub shots_per_phase: u64,
    pub reference_shots: u64,
    pub phase_points: usize,
}

/// Grid of the mode-instability sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub rel_std: Vec<f64>,
    pub t_chirp_us: Vec<f64>,
    pub chirp_rate_hz_per_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Default output directory; `--out` takes precedence.
    pub directory: String,
    /// Also record populations and fidelity on a time grid.
    pub time_series: bool,
    pub time_points: usize,
}

/// Complete, strictly parsed run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub gate: GateConfig,
    pub noise: NoiseConfig,
    pub numerics: NumericsConfig,
    pub readout: ReadoutConfig,
    pub sweep: SweepConfig,
    pub outputs: OutputConfig,
}

impl NoiseConfig {
    pub fn from_scenario(s: &NoiseScenario) -> Self {
        Self {
            mode_jitter_rel_std: s.mode_jitter_rel_std,
            chirp_rate_hz_per_us: s.chirp_rate,
            chirp_duration_s: s.chirp_duration,
            chirp_start_offset_s: s.chirp_start_offset,
            spectator_enabled: s.spectator_enabled,
            spectator_spacing_hz: s.spectator_spacing / TWO_PI,
            nbar_gate_mode: s.nbar_gate_mode,
            nbar_spectator: s.nbar_spectator,
            heating_rate: s.heating_rate,
            dephasing_time_s: s.dephasing_time,
            aczs_rel_std: s.aczs_rel_std,
            rabi_imbalance: s.rabi_imbalance,
            envelope_shape: s.envelope_shape,
            transient: s.transient,
        }
    }

    pub fn to_scenario(&self) -> NoiseScenario {
        NoiseScenario {
            mode_jitter_rel_std: self.mode_jitter_rel_std,
            chirp_rate: self.chirp_rate_hz_per_us,
            chirp_duration: self.chirp_duration_s,
            chirp_start_offset: self.chirp_start_offset_s,
            spectator_enabled: self.spectator_enabled,
            spectator_spacing: angular(self.spectator_spacing_hz),
            nbar_gate_mode: self.nbar_gate_mode,
            nbar_spectator: self.nbar_spectator,
            heating_rate: self.heating_rate,
            dephasing_time: self.dephasing_time_s,
            aczs_rel_std: self.aczs_rel_std,
            rabi_imbalance: self.rabi_imbalance,
            envelope_shape: self.envelope_shape,
            transient: self.transient,
        }
    }
}

impl GateConfig {
    pub fn paper_defaults() -> Self {
        Self {
            rabi_hz: PAPER_RABI_HZ,
            loops: PAPER_LOOPS,
            detuning_hz: None,
            gate_time_s: None,
            aczs_hz: PAPER_ACZS_HZ,
            mode_r2_hz: PAPER_MODE_R2_HZ,
            mode_spacing_hz: PAPER_MODE_SPACING_HZ,
            qubit_hz: PAPER_QUBIT_HZ,
            ramp_time_s: PAPER_RAMP_TIME,
        }
    }

    /// Converts to angular units.
    pub fn to_params(&self) -> Result<GateParams> {
        let omega = angular(self.rabi_hz);
        let derived = derive_gate(omega, self.loops)?;
        let r2 = angular(self.mode_r2_hz);
        let p = GateParams {
            omega_gate: omega,
            loops: self.loops,
            detuning: self.detuning_hz.map_or(derived.detuning_theory, angular),
            aczs: angular(self.aczs_hz),
            mode_freq_r2: r2,
            mode_freq_r1: r2 - angular(self.mode_spacing_hz),
            qubit_freq: angular(self.qubit_hz),
            ramp_time: self.ramp_time_s,
            gate_time: self.gate_time_s.unwrap_or(derived.gate_time),
            rabi_red: omega,
            rabi_blue: omega,
            spectator_rabi: omega,
        };
        p.validate()?;
        Ok(p)
    }
}

impl ScenarioConfig {
    /// Published gate parameters with every budget channel switched on
    /// except the spectator mode, which is evaluated on its own in the
    /// budget.
    pub fn paper_defaults() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            gate: GateConfig::paper_defaults(),
            noise: NoiseConfig {
                // carried but inactive until spectator_enabled is set
                spectator_spacing_hz: PAPER_MODE_SPACING_HZ,
                nbar_spectator: crate::noise::TABLE1_NBAR_SPECTATOR,
                ..NoiseConfig::from_scenario(&all_noise_scenario(false))
            },
            numerics: NumericsConfig {
                fock_cutoff: crate::quantum::DEFAULT_FOCK_CUTOFF,
                rel_tol: 1e-8,
                abs_tol: 1e-10,
                max_step_s: None,
                n_shots: 1000,
                seed: 1,
            },
            readout: ReadoutConfig {
                t_detect_s: PLACEHOLDER_T_DETECT,
                lambda_bright: PLACEHOLDER_LAMBDA_BRIGHT,
                lambda_dark: PLACEHOLDER_LAMBDA_DARK,
                depump_product: PLACEHOLDER_DEPUMP_PRODUCT,
                shots_per_phase: 200,
                reference_shots: 2000,
                phase_points: 21,
            },
            sweep: SweepConfig {
                rel_std: vec![0.0, 0.25 * TABLE1_JITTER_REL_STD, 0.5 * TABLE1_JITTER_REL_STD, TABLE1_JITTER_REL_STD, 1.5 * TABLE1_JITTER_REL_STD, 2.0 * TABLE1_JITTER_REL_STD],
                t_chirp_us: vec![0.0, 300.0, TABLE1_CHIRP_DURATION * 1e6],
                chirp_rate_hz_per_us: TABLE1_CHIRP_RATE_HZ_PER_US,
            },
            outputs: OutputConfig { directory: "msgate-output".into(), time_series: false, time_points: 101 },
        }
    }

    /// Same gate and numerics with every noise channel off.
    pub fn ideal() -> Self {
        let mut c = Self::paper_defaults();
        c.noise = NoiseConfig::from_scenario(&NoiseScenario::ideal());
        c
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        self.gate.to_params().map_err(|e| Error::Config(format!("gate: {e}")))?;
        self.noise.to_scenario().validate().map_err(|e| Error::Config(format!("noise: {e}")))?;
        let n = &self.numerics;
        if n.fock_cutoff < 2 {
            return bad("numerics.fock_cutoff must be >= 2".into());
        }
        if !(n.rel_tol > 0.0) || !(n.abs_tol > 0.0) {
            return bad("numerics tolerances must be positive".into());
        }
        if n.max_step_s.is_some_and(|h| !(h > 0.0)) {
            return bad("numerics.max_step_s must be positive or null".into());
        }
        if n.n_shots == 0 {
            return bad("numerics.n_shots must be >= 1".into());
        }
        self.detection_model().validate().map_err(|e| Error::Config(format!("readout: {e}")))?;
        let r = &self.readout;
        if r.shots_per_phase == 0 || r.reference_shots == 0 {
            return bad("readout shot counts must be >= 1".into());
        }
        if r.phase_points < 5 {
            return bad("readout.phase_points must be >= 5".into());
        }
        let s = &self.sweep;
        if s.rel_std.iter().chain(&s.t_chirp_us).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return bad("sweep axes must be finite and non-negative".into());
        }
        if !s.chirp_rate_hz_per_us.is_finite() {
            return bad("sweep.chirp_rate_hz_per_us must be finite".into());
        }
        if self.outputs.time_series && self.outputs.time_points < 2 {
            return bad("outputs.time_points must be >= 2".into());
        }
        Ok(())
    }

    pub fn params(&self) -> Result<GateParams> {
        self.gate.to_params()
    }

    pub fn scenario(&self) -> NoiseScenario {
        self.noise.to_scenario()
    }

    pub fn settings(&self) -> SimulationSettings {
        SimulationSettings {
            fock_cutoff: self.numerics.fock_cutoff,
            rel_tol: self.numerics.rel_tol,
            abs_tol: self.numerics.abs_tol,
            max_step: self.numerics.max_step_s,
            initial_spin: 0,
        }
    }

    pub fn detection_model(&self) -> DetectionModel {
        let r = &self.readout;
        DetectionModel::from_products(r.t_detect_s, r.lambda_bright, r.lambda_dark, r.depump_product)
    }
}

/// Where each default value comes from.
pub fn default_provenance() -> Vec<(&'static str, String, &'static str)> {
    let c = ScenarioConfig::paper_defaults();
    let measured = "published measurement";
    let budget = "published error-budget parameter";
    let derived = "loop-closing derivation";
    let placeholder = "placeholder, not a published value";
    let choice = "numerical setting";
    let n = &c.noise;
    vec![
        ("gate.rabi_hz", c.gate.rabi_hz.to_string(), measured),
        ("gate.loops", c.gate.loops.to_string(), measured),
        ("gate.detuning_hz", "null (2*rabi*sqrt(loops))".into(), derived),
        ("gate.gate_time_s", "null (pi*sqrt(loops)/rabi)".into(), derived),
        ("gate.aczs_hz", c.gate.aczs_hz.to_string(), measured),
        ("gate.mode_r2_hz", c.gate.mode_r2_hz.to_string(), measured),
        ("gate.mode_spacing_hz", c.gate.mode_spacing_hz.to_string(), measured),
        ("gate.qubit_hz", c.gate.qubit_hz.to_string(), measured),
        ("gate.ramp_time_s", c.gate.ramp_time_s.to_string(), measured),
        ("noise.mode_jitter_rel_std", n.mode_jitter_rel_std.to_string(), budget),
        ("noise.chirp_rate_hz_per_us", n.chirp_rate_hz_per_us.to_string(), budget),
        ("noise.chirp_duration_s", n.chirp_duration_s.to_string(), budget),
        ("noise.nbar_gate_mode", n.nbar_gate_mode.to_string(), measured),
        ("noise.spectator_enabled", n.spectator_enabled.to_string(), choice),
        ("noise.spectator_spacing_hz", n.spectator_spacing_hz.to_string(), measured),
        ("noise.nbar_spectator", n.nbar_spectator.to_string(), measured),
        ("noise.heating_rate", n.heating_rate.to_string(), budget),
        ("noise.dephasing_time_s", n.dephasing_time_s.to_string(), budget),
        ("noise.aczs_rel_std", n.aczs_rel_std.to_string(), budget),
        ("noise.rabi_imbalance", n.rabi_imbalance.to_string(), budget),
        ("noise.envelope_shape", "erf_ramp".into(), budget),
        ("numerics.fock_cutoff", c.numerics.fock_cutoff.to_string(), measured),
        ("numerics.n_shots", c.numerics.n_shots.to_string(), choice),
        ("readout.t_detect_s", c.readout.t_detect_s.to_string(), measured),
        ("readout.shots_per_phase", c.readout.shots_per_phase.to_string(), measured),
        ("readout.phase_points", c.readout.phase_points.to_string(), choice),
        ("readout.lambda_bright", c.readout.lambda_bright.to_string(), placeholder),
        ("readout.lambda_dark", c.readout.lambda_dark.to_string(), placeholder),
        ("readout.depump_product", c.readout.depump_product.to_string(), placeholder),
    ]
}
