//! Lindblad master-equation propagation.
//!
//! ρ̇ = −i[H(t), ρ] + Σ_k γ_k D[L_k]ρ with D[L]ρ = LρL† − ½{L†L, ρ}.
//! Heating enters as γ_h(D[a] + D[a†]) on the gate mode, which gives
//! d⟨a†a⟩/dt = γ_h exactly, so γ_h is the phonon gain per second.
//! Dephasing enters as γ_d/2 Σ_j D[σᶻ_j].

mod engine;
mod integrator;
mod oracle;
mod shots;

pub use engine::{
    dissipator_apply, evolve, CollapseTerm, Diagnostics, EvolutionProblem, InitialState, Tolerances, Trajectory,
};
pub use integrator::{Dop853, OdeSystem, StepStats};
pub use oracle::{evolve_exact_oracle, lindblad_superoperator, ORACLE_MAX_DIM};
pub use shots::*;

use crate::error::{Error, Result};
use crate::noise::NoiseScenario;
use crate::quantum::{embed, fock_ladder, qubit_ops, HilbertLayout};

/// Collapse terms of a scenario: (a, γ_h) and (a†, γ_h) on the gate mode,
/// (σᶻ_j, γ_d/2) on every qubit.
pub fn build_dissipators(scenario: &NoiseScenario, layout: &HilbertLayout) -> Result<Vec<CollapseTerm>> {
    let mut out = Vec::new();
    if scenario.heating_rate > 0.0 {
        let f = layout.mode_factor(0).ok_or(Error::MissingMode("gate"))?;
        let a = embed(&fock_ladder(layout.factor_dim(f)?)?, f, layout)?;
        out.push(CollapseTerm { operator: a.adjoint(), rate: scenario.heating_rate });
        out.insert(0, CollapseTerm { operator: a, rate: scenario.heating_rate });
    }
    let gamma_d = scenario.dephasing_rate();
    if gamma_d > 0.0 {
        let z = qubit_ops().z;
        for j in 0..layout.qubit_count() {
            out.push(CollapseTerm { operator: embed(&z, j, layout)?, rate: 0.5 * gamma_d });
        }
    }
    Ok(out)
}
