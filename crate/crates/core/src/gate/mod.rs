//! Gate parameters, pulse envelopes and time-dependent Hamiltonians in the
//! interaction picture of the qubits and motional modes.

mod envelope;
mod hamiltonian;
mod params;

pub use envelope::{EnvelopeShape, PulseEnvelope, Transient};
pub use hamiltonian::{
    build_aczs, build_mode_instability, build_ms_extended, build_ms_ideal, build_spectator, Coefficient,
    GateOperators, HamiltonianTerm, TimeDependentOperator,
};
pub use params::*;
