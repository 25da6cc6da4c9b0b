//! Simulation and analysis toolkit for microwave-driven Mølmer–Sørensen
//! entangling gates on trapped ions.
//!
//! The crate is layered bottom-up:
//!
//! - [`quantum`]: operators and states on truncated spin ⊗ Fock spaces
//! - [`gate`]: gate parameters, pulse envelopes and the time-dependent
//!   Hamiltonians (ideal, bichromatic with imbalance, mode instability,
//!   AC Zeeman shift, spectator mode)
//! - [`noise`]: noise scenarios and seeded shot-to-shot sampling
//! - [`lindblad`]: master-equation propagation, the superoperator oracle and
//!   Monte-Carlo shot averaging
//! - [`analysis`]: Bell-state fidelity, analysis pulses, parity scans and
//!   fringe fits
//! - [`readout`]: photon-count models with depumping, histogram synthesis
//!   and maximum-likelihood population fits
//! - [`runner`]: configuration, error budget, sweeps and report writers
//!   used by the `msgate` binary

pub mod analysis;
pub mod error;
pub mod gate;
pub mod lindblad;
pub mod noise;
pub mod quantum;
pub mod readout;
pub mod runner;

pub use error::{Error, Result};
pub use quantum::{DensityMatrix, HilbertLayout, Operator, C64};

/// 2π, for converting ordinary frequencies to angular ones.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Converts an ordinary frequency in Hz to rad/s.
pub fn angular(hz: f64) -> f64 {
    TWO_PI * hz
}
