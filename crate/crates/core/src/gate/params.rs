use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::angular;

/// Gate Rabi frequency Ω/2π reported for the device, Hz.
pub const PAPER_RABI_HZ: f64 = 1.071e3;
/// Loops in motional phase space.
pub const PAPER_LOOPS: u32 = 3;
/// Detuning that maximized the measured fidelity, Hz. Kept for reference;
/// simulations run at the loop-closing detuning.
pub const PAPER_MEASURED_DETUNING_HZ: f64 = 3.4e3;
/// Differential AC Zeeman shift Δ/2π, Hz.
pub const PAPER_ACZS_HZ: f64 = 4.37e3;
pub const PAPER_MODE_R2_HZ: f64 = 6.318e6;
/// Spacing ω_r2 − ω_r1 between the rocking modes, Hz.
pub const PAPER_MODE_SPACING_HZ: f64 = 42.5e3;
pub const PAPER_QUBIT_HZ: f64 = 1082.55e6;
/// Length of each erf-shaped ramp, s.
pub const PAPER_RAMP_TIME: f64 = 2e-6;

/// Deterministic gate quantities. Frequencies are angular (rad/s), times in
/// seconds. `qubit_freq`, `aczs` and the absolute mode frequencies are
/// bookkeeping: the dynamics live in the interaction frame and only see the
/// detuning and the mode spacing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub omega_gate: f64,
    pub loops: u32,
    pub detuning: f64,
    pub aczs: f64,
    pub mode_freq_r2: f64,
    pub mode_freq_r1: f64,
    pub qubit_freq: f64,
    pub ramp_time: f64,
    pub gate_time: f64,
    pub rabi_red: f64,
    pub rabi_blue: f64,
    pub spectator_rabi: f64,
}

/// Loop-closing gate time and detuning for a given Rabi frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedGate {
    /// τ = π√K/Ω
    pub gate_time: f64,
    /// δ = 2Ω√K
    pub detuning_theory: f64,
}

pub fn derive_gate(omega_gate: f64, loops: u32) -> Result<DerivedGate> {
    if !(omega_gate > 0.0) || !omega_gate.is_finite() {
        return Err(Error::InvalidParameter(format!("gate Rabi frequency {omega_gate} must be > 0")));
    }
    if loops == 0 {
        return Err(Error::InvalidParameter("loops must be >= 1".into()));
    }
    let root_k = (loops as f64).sqrt();
    Ok(DerivedGate { gate_time: PI * root_k / omega_gate, detuning_theory: 2.0 * omega_gate * root_k })
}

impl GateParams {
    /// Balanced, loop-closing gate for Ω and K with all bookkeeping
    /// frequencies set to the device values.
    pub fn from_rabi(omega_gate: f64, loops: u32) -> Result<Self> {
        let d = derive_gate(omega_gate, loops)?;
        let r2 = angular(PAPER_MODE_R2_HZ);
        Ok(Self {
            omega_gate,
            loops,
            detuning: d.detuning_theory,
            aczs: angular(PAPER_ACZS_HZ),
            mode_freq_r2: r2,
            mode_freq_r1: r2 - angular(PAPER_MODE_SPACING_HZ),
            qubit_freq: angular(PAPER_QUBIT_HZ),
            ramp_time: PAPER_RAMP_TIME,
            gate_time: d.gate_time,
            rabi_red: omega_gate,
            rabi_blue: omega_gate,
            spectator_rabi: omega_gate,
        })
    }

    pub fn paper_defaults() -> Self {
        Self::from_rabi(angular(PAPER_RABI_HZ), PAPER_LOOPS).expect("paper gate parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let freqs = [
            ("omega_gate", self.omega_gate),
            ("detuning", self.detuning),
            ("aczs", self.aczs),
            ("mode_freq_r2", self.mode_freq_r2),
            ("mode_freq_r1", self.mode_freq_r1),
            ("qubit_freq", self.qubit_freq),
            ("rabi_red", self.rabi_red),
            ("rabi_blue", self.rabi_blue),
            ("spectator_rabi", self.spectator_rabi),
            ("ramp_time", self.ramp_time),
        ];
        if let Some((name, v)) = freqs.iter().find(|(_, v)| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be finite and >= 0")));
        }
        if self.loops == 0 {
            return Err(Error::InvalidParameter("loops must be >= 1".into()));
        }
        if !(self.gate_time > 2.0 * self.ramp_time) {
            return Err(Error::InvalidParameter(format!(
                "gate time {} must exceed twice the ramp time {}",
                self.gate_time, self.ramp_time
            )));
        }
        Ok(())
    }

    /// Sets Ω_R and Ω_B so that (Ω_R − Ω_B)/Ω_B = `imbalance` while their
    /// mean stays at Ω.
    pub fn with_rabi_imbalance(mut self, imbalance: f64) -> Self {
        let blue = 2.0 * self.omega_gate / (2.0 + imbalance);
        self.rabi_blue = blue;
        self.rabi_red = blue * (1.0 + imbalance);
        self
    }

    /// Δν = ω_r2 − ω_r1.
    pub fn mode_spacing(&self) -> f64 {
        self.mode_freq_r2 - self.mode_freq_r1
    }

    pub fn with_mode_spacing(mut self, spacing: f64) -> Self {
        self.mode_freq_r1 = self.mode_freq_r2 - spacing;
        self
    }
}
