//! Noise scenarios and seeded shot-to-shot sampling.
//!
//! Random parameters are quasi-static: one draw per shot, held for the
//! whole pulse. Every draw is keyed by (seed, shot index, channel), so shots
//! can be simulated in any order or in parallel with identical results.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{EnvelopeShape, GateParams, Transient};
use crate::{angular, TWO_PI};

/// Stream tags for the independently sampled channels.
pub const CHANNEL_MODE_JITTER: u64 = 1;
pub const CHANNEL_ACZS: u64 = 2;
/// Photon-count sampling for readout histograms.
pub const CHANNEL_READOUT: u64 = 3;
/// Calibration reference histograms.
pub const CHANNEL_REFERENCE: u64 = 4;
/// Fit starting points and bootstrap resampling.
pub const CHANNEL_FIT: u64 = 5;

/// Switchable noise channels. All-zero/off is the ideal gate.
///
/// `spectator_spacing` is angular; `chirp_rate` is in Hz/µs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseScenario {
    /// Std of δ_ε/δ, drawn once per shot.
    pub mode_jitter_rel_std: f64,
    pub chirp_rate: f64,
    pub chirp_duration: f64,
    /// Time already elapsed on the chirp when the gate starts, s.
    #[serde(default)]
    pub chirp_start_offset: f64,
    pub spectator_enabled: bool,
    pub spectator_spacing: f64,
    pub nbar_gate_mode: f64,
    pub nbar_spectator: f64,
    /// γ_h in quanta/s; with L_h = γ_h(D[a] + D[a†]) this equals d⟨n⟩/dt.
    pub heating_rate: f64,
    /// τ_d = 1/γ_d in seconds; 0 disables dephasing.
    pub dephasing_time: f64,
    /// Std of Δ_ε/Δ, drawn once per shot.
    pub aczs_rel_std: f64,
    /// (Ω_R − Ω_B)/Ω_B
    pub rabi_imbalance: f64,
    pub envelope_shape: EnvelopeShape,
    pub transient: Transient,
}

impl NoiseScenario {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("mode_jitter_rel_std", self.mode_jitter_rel_std),
            ("chirp_duration", self.chirp_duration),
            ("chirp_start_offset", self.chirp_start_offset),
            ("spectator_spacing", self.spectator_spacing),
            ("nbar_gate_mode", self.nbar_gate_mode),
            ("nbar_spectator", self.nbar_spectator),
            ("heating_rate", self.heating_rate),
            ("dephasing_time", self.dephasing_time),
            ("aczs_rel_std", self.aczs_rel_std),
            ("transient.time_constant", self.transient.time_constant),
        ];
        if let Some((name, v)) = nonneg.iter().find(|(_, v)| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be finite and >= 0")));
        }
        for (name, v) in [
            ("chirp_rate", self.chirp_rate),
            ("rabi_imbalance", self.rabi_imbalance),
            ("transient.amplitude", self.transient.amplitude),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be finite")));
            }
        }
        if self.rabi_imbalance <= -1.0 {
            return Err(Error::InvalidParameter("rabi_imbalance must exceed -1".into()));
        }
        if self.spectator_enabled && self.spectator_spacing == 0.0 {
            return Err(Error::InvalidParameter("spectator mode needs a nonzero spacing".into()));
        }
        Ok(())
    }

    /// True when some channel is drawn per shot.
    pub fn is_stochastic(&self) -> bool {
        self.mode_jitter_rel_std > 0.0 || self.aczs_rel_std > 0.0
    }

    /// γ_d = 1/τ_d, zero when dephasing is off.
    pub fn dephasing_rate(&self) -> f64 {
        if self.dephasing_time > 0.0 {
            1.0 / self.dephasing_time
        } else {
            0.0
        }
    }

    pub fn has_mode_drift(&self) -> bool {
        self.mode_jitter_rel_std > 0.0 || (self.chirp_rate != 0.0 && self.chirp_duration > 0.0)
    }

    pub fn has_collapse_terms(&self) -> bool {
        self.heating_rate > 0.0 || self.dephasing_rate() > 0.0
    }
}

/// Per-shot random offsets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotSample {
    /// Quasi-static mode-frequency offset, rad/s.
    pub delta_eps_offset: f64,
    /// Quasi-static ACZS offset, rad/s.
    pub aczs_offset: f64,
    pub seed: u64,
    pub shot_index: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for one (seed, channel) pair, positioned on the stream of
/// `index`. The key is expanded from (seed, channel) with SplitMix64 and the
/// index selects one of ChaCha's 2⁶⁴ independent streams.
pub fn channel_rng(seed: u64, channel: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed) ^ splitmix64(channel.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

fn normal(seed: u64, channel: u64, index: u64) -> f64 {
    channel_rng(seed, channel, index).sample(StandardNormal)
}

/// Draws the quasi-static offsets of one shot. Jitter is referenced to the
/// gate detuning, ACZS fluctuations to the nominal shift.
pub fn sample_shot(scenario: &NoiseScenario, params: &GateParams, seed: u64, shot_index: u64) -> ShotSample {
    let delta_eps_offset = if scenario.mode_jitter_rel_std > 0.0 {
        scenario.mode_jitter_rel_std * params.detuning * normal(seed, CHANNEL_MODE_JITTER, shot_index)
    } else {
        0.0
    };
    let aczs_offset = if scenario.aczs_rel_std > 0.0 {
        scenario.aczs_rel_std * params.aczs * normal(seed, CHANNEL_ACZS, shot_index)
    } else {
        0.0
    };
    ShotSample { delta_eps_offset, aczs_offset, seed, shot_index }
}

/// δ_ε(t) = offset + 2π·rate·min(t + t₀, T_chirp), rate converted from
/// Hz/µs to Hz/s.
pub fn delta_eps_profile(sample: &ShotSample, scenario: &NoiseScenario) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    let offset = sample.delta_eps_offset;
    let slope = TWO_PI * scenario.chirp_rate * 1e6;
    let t_end = scenario.chirp_duration;
    let t0 = scenario.chirp_start_offset;
    Arc::new(move |t: f64| offset + slope * (t + t0).clamp(0.0, t_end))
}

/// Time at which the chirp saturates within the gate, if it does.
pub fn chirp_breakpoint(scenario: &NoiseScenario) -> Option<f64> {
    let t = scenario.chirp_duration - scenario.chirp_start_offset;
    (scenario.chirp_rate != 0.0 && t > 0.0).then_some(t)
}

/// One row of the infidelity budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetScenario {
    pub name: String,
    pub parameter: String,
    pub scenario: NoiseScenario,
    /// False for rows that are measured rather than simulated.
    pub simulate: bool,
    /// Published infidelity for this row.
    pub reference_infidelity: f64,
    /// True when the published value is an upper bound.
    pub reference_is_bound: bool,
}

pub const TABLE1_JITTER_REL_STD: f64 = 1.1e-2;
pub const TABLE1_CHIRP_RATE_HZ_PER_US: f64 = 0.3;
pub const TABLE1_CHIRP_DURATION: f64 = 600e-6;
pub const TABLE1_NBAR_SPECTATOR: f64 = 0.27;
pub const TABLE1_NBAR_GATE: f64 = 0.11;
pub const TABLE1_HEATING_RATE: f64 = 28.0;
pub const TABLE1_DEPHASING_TIME: f64 = 0.5;
pub const TABLE1_ACZS_REL_STD: f64 = 8e-4;
pub const TABLE1_RABI_IMBALANCE: f64 = 2.33e-2;

/// The eight single-effect rows of the error budget, each on top of
/// otherwise ideal dynamics with the gate mode in its ground state.
pub fn table1_scenarios() -> Vec<BudgetScenario> {
    let row = |name: &str, parameter: &str, scenario: NoiseScenario, value: f64, bound: bool| BudgetScenario {
        name: name.into(),
        parameter: parameter.into(),
        scenario,
        simulate: true,
        reference_infidelity: value,
        reference_is_bound: bound,
    };
    let base = NoiseScenario::ideal();
    let mut scattering = row(
        "Off-resonant scattering loss",
        "measured on a single qubit, not simulated",
        base.clone(),
        2.3e-3,
        true,
    );
    scattering.simulate = false;
    vec![
        row(
            "Mode instability",
            "rel. std 1.1e-2, chirp 0.3 Hz/us for 600 us",
            NoiseScenario {
                mode_jitter_rel_std: TABLE1_JITTER_REL_STD,
                chirp_rate: TABLE1_CHIRP_RATE_HZ_PER_US,
                chirp_duration: TABLE1_CHIRP_DURATION,
                ..base.clone()
            },
            1.3e-2,
            false,
        ),
        row(
            "Spectator mode",
            "spacing 2pi x 42.5 kHz, nbar_r1 = 0.27",
            NoiseScenario {
                spectator_enabled: true,
                spectator_spacing: angular(crate::gate::PAPER_MODE_SPACING_HZ),
                nbar_spectator: TABLE1_NBAR_SPECTATOR,
                ..base.clone()
            },
            5.2e-3,
            false,
        ),
        row(
            "Motional heating",
            "gamma_h = 28 quanta/s",
            NoiseScenario { heating_rate: TABLE1_HEATING_RATE, ..base.clone() },
            3.8e-3,
            false,
        ),
        scattering,
        row(
            "Qubit decoherence",
            "tau_d = 0.5 s",
            NoiseScenario { dephasing_time: TABLE1_DEPHASING_TIME, ..base.clone() },
            9.3e-4,
            true,
        ),
        row(
            "Pulse shape",
            "erf ramps of 2 us, transients off",
            NoiseScenario { envelope_shape: EnvelopeShape::ErfRamp, ..base.clone() },
            6.3e-4,
            true,
        ),
        row(
            "ACZS fluctuations",
            "rel. std 8e-4 of 2pi x 4.37 kHz",
            NoiseScenario { aczs_rel_std: TABLE1_ACZS_REL_STD, ..base.clone() },
            1.1e-4,
            false,
        ),
        row(
            "Rabi frequency imbalance",
            "(Omega_R - Omega_B)/Omega_B = 2.33e-2",
            NoiseScenario { rabi_imbalance: TABLE1_RABI_IMBALANCE, ..base },
            4.1e-6,
            false,
        ),
    ]
}

/// Every channel of the budget switched on at once, with the measured
/// thermal occupation of the gate mode.
pub fn all_noise_scenario(include_spectator: bool) -> NoiseScenario {
    let mut s = NoiseScenario::ideal();
    for row in table1_scenarios().into_iter().filter(|r| r.simulate) {
        let r = row.scenario;
        s.mode_jitter_rel_std += r.mode_jitter_rel_std;
        s.chirp_rate += r.chirp_rate;
        s.chirp_duration += r.chirp_duration;
        s.heating_rate += r.heating_rate;
        s.dephasing_time += r.dephasing_time;
        s.aczs_rel_std += r.aczs_rel_std;
        s.rabi_imbalance += r.rabi_imbalance;
        if r.envelope_shape != EnvelopeShape::Rectangular {
            s.envelope_shape = r.envelope_shape;
        }
        if r.spectator_enabled && include_spectator {
            s.spectator_enabled = true;
            s.spectator_spacing = r.spectator_spacing;
            s.nbar_spectator = r.nbar_spectator;
        }
    }
    s.nbar_gate_mode = TABLE1_NBAR_GATE;
    s
}
