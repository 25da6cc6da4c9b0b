//! Bell-state fidelity, analysis pulses, parity scans and fringe fits.

mod bell;
mod parity;

pub use bell::{
    assemble_fidelity, bell_target, bell_target_with_phase, fidelity, populations, FidelityReport,
    SpinPopulations,
};
pub(crate) use bell::fidelity_unchecked;
pub use parity::{analysis_pulse, analysis_pulse_unitary, fit_fringe, parity_scan, phase_grid, FringeFit, ParityScan};
