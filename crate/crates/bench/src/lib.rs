//! Fixtures shared by the propagation benchmarks.

use msgate_core::gate::{GateOperators, GateParams};
use msgate_core::lindblad::{build_dissipators, EvolutionProblem, GateModel, SimulationSettings};
use msgate_core::noise::NoiseScenario;
use msgate_core::quantum::{thermal_state, HilbertLayout};
use msgate_core::{DensityMatrix, Result};

/// Settings at the given Fock cutoff with default tolerances.
pub fn settings(fock_cutoff: usize) -> SimulationSettings {
    SimulationSettings { fock_cutoff, ..Default::default() }
}

/// Ideal gate on the paper-default parameters.
pub fn ideal_model(fock_cutoff: usize) -> Result<GateModel> {
    GateModel::new(&GateParams::paper_defaults(), &NoiseScenario::ideal(), &settings(fock_cutoff))
}

/// Gate with motional heating, which forces the full density-matrix path.
pub fn heating_model(fock_cutoff: usize) -> Result<GateModel> {
    let scenario = NoiseScenario { heating_rate: msgate_core::noise::TABLE1_HEATING_RATE, ..NoiseScenario::ideal() };
    GateModel::new(&GateParams::paper_defaults(), &scenario, &settings(fock_cutoff))
}

/// Two qubits and a four-level mode under a piecewise-constant gate drive
/// with heating and dephasing, small enough for the exponentiation oracle.
pub fn oracle_problem() -> Result<EvolutionProblem> {
    let layout = HilbertLayout::new(2, vec![4])?;
    let params = GateParams::paper_defaults();
    let h = GateOperators::new(&layout)?.ms_piecewise(&params, 24)?;
    let rho0 = DensityMatrix::basis(HilbertLayout::qubits(2)?, 0)?.tensor(&thermal_state(0.11, 4)?)?;
    let mut p = EvolutionProblem::new(h, rho0, params.gate_time);
    let scenario = NoiseScenario { heating_rate: 300.0, dephasing_time: 0.01, ..NoiseScenario::ideal() };
    p.collapse_terms = build_dissipators(&scenario, &layout)?;
    Ok(p)
}
