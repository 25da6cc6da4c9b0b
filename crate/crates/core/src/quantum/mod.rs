//! Operator algebra on truncated spin-motion tensor spaces.
//!
//! Index conventions are fixed here for the whole crate: qubit basis index 0
//! is |↑⟩ and 1 is |↓⟩, and tensor factors are ordered qubits first, then
//! motional modes in the order listed by the layout (gate mode, then the
//! spectator mode when present). The first factor is the most significant
//! digit of a flat basis index.

mod layout;
mod ops;
pub mod sparse;
mod state;

pub use layout::{FactorSplit, HilbertLayout};
pub use ops::{
    embed, expect, fock_ladder, number_operator, partial_trace, qubit_ops, thermal_populations,
    thermal_state, Operator, QubitOps,
};
pub use state::{DensityMatrix, StateTolerances, EIGEN_CHECK_MAX_DIM};

pub use num_complex::Complex64 as C64;

/// Default number of Fock states kept per motional mode.
pub const DEFAULT_FOCK_CUTOFF: usize = 25;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);
