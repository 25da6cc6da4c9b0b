use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_dissipators, evolve, CollapseTerm, EvolutionProblem, InitialState, Tolerances, Trajectory};
use crate::analysis::{fidelity_unchecked, FidelityReport};
use crate::error::{Error, Result};
use crate::gate::{GateOperators, GateParams, PulseEnvelope};
use crate::noise::{chirp_breakpoint, delta_eps_profile, sample_shot, NoiseScenario, ShotSample};
use crate::quantum::{thermal_populations, DensityMatrix, HilbertLayout, C64, DEFAULT_FOCK_CUTOFF};

/// Numerical settings shared by all shots of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    /// Fock states kept per motional mode.
    pub fock_cutoff: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step-size cap; `None` derives 1/(50·f_max) from the fastest
    /// frequency in the Hamiltonian.
    pub max_step: Option<f64>,
    /// Computational basis index of the initial two-qubit state (0 = ↑↑).
    pub initial_spin: usize,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self { fock_cutoff: DEFAULT_FOCK_CUTOFF, rel_tol: 1e-8, abs_tol: 1e-10, max_step: None, initial_spin: 0 }
    }
}

/// Everything about a scenario that does not change from shot to shot.
#[derive(Clone, Debug)]
pub struct GateModel {
    pub params: GateParams,
    pub scenario: NoiseScenario,
    pub envelope: PulseEnvelope,
    pub ops: GateOperators,
    pub collapse: Vec<CollapseTerm>,
    pub initial_populations: Vec<f64>,
    pub tolerances: Tolerances,
}

impl GateModel {
    /// Applies the scenario's deterministic modifications (imbalance, mode
    /// spacing, envelope) to `params` and prepares operators.
    pub fn new(params: &GateParams, scenario: &NoiseScenario, settings: &SimulationSettings) -> Result<Self> {
        params.validate()?;
        scenario.validate()?;
        let mut p = params.clone();
        if scenario.rabi_imbalance != 0.0 {
            p = p.with_rabi_imbalance(scenario.rabi_imbalance);
        }
        if scenario.spectator_enabled {
            p = p.with_mode_spacing(scenario.spectator_spacing);
        }
        let envelope = PulseEnvelope::new(scenario.envelope_shape, p.ramp_time, p.gate_time)?
            .with_transient(scenario.transient);
        let n = settings.fock_cutoff;
        let fock = if scenario.spectator_enabled { vec![n, n] } else { vec![n] };
        let layout = HilbertLayout::new(2, fock)?;
        if settings.initial_spin >= 4 {
            return Err(Error::InvalidParameter(format!("initial spin index {} >= 4", settings.initial_spin)));
        }
        let mut pops = vec![0.0; 4];
        pops[settings.initial_spin] = 1.0;
        pops = kron_vec(&pops, &thermal_populations(scenario.nbar_gate_mode, n)?);
        if scenario.spectator_enabled {
            pops = kron_vec(&pops, &thermal_populations(scenario.nbar_spectator, n)?);
        }
        let omega_max = if scenario.spectator_enabled { p.detuning.max(p.mode_spacing() + p.detuning) } else { p.detuning };
        let mut tolerances = Tolerances { rel_tol: settings.rel_tol, abs_tol: settings.abs_tol, max_step: None };
        tolerances.max_step = settings.max_step.or(Tolerances::for_frequency(omega_max).max_step);
        Ok(Self {
            collapse: build_dissipators(scenario, &layout)?,
            ops: GateOperators::new(&layout)?,
            params: p,
            scenario: scenario.clone(),
            envelope,
            initial_populations: pops,
            tolerances,
        })
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.ops.layout
    }

    pub fn sample(&self, seed: u64, shot_index: u64) -> ShotSample {
        sample_shot(&self.scenario, &self.params, seed, shot_index)
    }

    /// Master-equation problem of one shot; stored states keep `keep`
    /// (the two qubits when `None`).
    pub fn problem(&self, sample: &ShotSample, keep: Option<Vec<usize>>) -> Result<EvolutionProblem> {
        let mut h = self.ops.ms_extended(&self.params, &self.envelope)?;
        if self.scenario.has_mode_drift() {
            h.extend(self.ops.mode_instability(delta_eps_profile(sample, &self.scenario))?)?;
            h.add_breakpoints(chirp_breakpoint(&self.scenario));
        }
        if sample.aczs_offset != 0.0 {
            h.push_constant(self.ops.aczs(sample.aczs_offset))?;
        }
        if self.scenario.spectator_enabled {
            h.extend(self.ops.spectator(&self.params, &self.envelope)?)?;
        }
        let initial = InitialState::Diagonal { layout: self.layout().clone(), populations: self.initial_populations.clone() };
        let mut problem = EvolutionProblem::new(h, initial, self.params.gate_time);
        problem.collapse_terms = self.collapse.clone();
        problem.tolerances = self.tolerances;
        problem.keep = Some(keep.unwrap_or_else(|| vec![0, 1]));
        Ok(problem)
    }

    pub fn run_shot(&self, seed: u64, shot_index: u64) -> Result<ShotOutcome> {
        let sample = self.sample(seed, shot_index);
        let traj = evolve(&self.problem(&sample, None)?).map_err(|e| match e {
            Error::Integration { time, reason } => {
                Error::Integration { time, reason: format!("shot {shot_index}: {reason}") }
            }
            other => other,
        })?;
        ShotOutcome::from_trajectory(sample, traj)
    }
}

fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Final spin state of one shot plus the health checks of its trajectory.
#[derive(Clone, Debug)]
pub struct ShotOutcome {
    pub sample: ShotSample,
    pub spin_state: DensityMatrix,
    pub fidelity: FidelityReport,
    pub max_trace_deviation: f64,
    pub max_hermiticity_deviation: f64,
    pub min_eigenvalue: Option<f64>,
    pub steps: usize,
}

impl ShotOutcome {
    fn from_trajectory(sample: ShotSample, traj: Trajectory) -> Result<Self> {
        let d = &traj.diagnostics;
        let spin_state = traj.final_state().clone();
        if spin_state.dim() != 4 {
            return Err(Error::InvalidState("shot did not reduce to the two-qubit state".into()));
        }
        Ok(Self {
            sample,
            fidelity: fidelity_unchecked(&spin_state),
            max_trace_deviation: d.max_trace_deviation(),
            max_hermiticity_deviation: d.max_hermiticity_deviation(),
            min_eigenvalue: d.min_eigenvalue(),
            steps: d.steps.accepted + d.steps.rejected,
            spin_state,
        })
    }
}

/// Monte-Carlo average over shots.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShotsResult {
    pub n_shots: usize,
    /// Fidelity of the shot-averaged spin state.
    pub fidelity: FidelityReport,
    /// 1 − phase-insensitive fidelity of the averaged state.
    pub infidelity: f64,
    /// Jackknife standard error of `infidelity`; 0 for a single shot.
    pub std_error: f64,
    /// Mean of the per-shot infidelities.
    pub mean_shot_infidelity: f64,
    pub mean_shot_std_error: f64,
    /// Shot-averaged 4×4 spin density matrix, column-major (re, im).
    pub mean_state: Vec<(f64, f64)>,
    pub max_trace_deviation: f64,
    pub max_hermiticity_deviation: f64,
    pub min_eigenvalue: Option<f64>,
    pub total_steps: usize,
}

impl ShotsResult {
    pub fn mean_density_matrix(&self) -> DensityMatrix {
        let m = DMatrix::from_iterator(4, 4, self.mean_state.iter().map(|&(re, im)| C64::new(re, im)));
        DensityMatrix::from_matrix_unchecked(HilbertLayout::qubits(2).expect("two qubits"), m)
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Averages the final spin states of `n_shots` independent shots. Shots run
/// in parallel and are reduced in index order. Scenarios without random
/// channels run a single shot regardless of `n_shots`.
pub fn run_shots(
    scenario: &NoiseScenario,
    params: &GateParams,
    n_shots: usize,
    seed: u64,
    settings: &SimulationSettings,
) -> Result<ShotsResult> {
    if n_shots == 0 {
        return Err(Error::InvalidParameter("n_shots must be >= 1".into()));
    }
    let model = GateModel::new(params, scenario, settings)?;
    let n = if scenario.is_stochastic() { n_shots } else { 1 };
    let outcomes: Vec<ShotOutcome> =
        (0..n as u64).into_par_iter().map(|i| model.run_shot(seed, i)).collect::<Result<Vec<_>>>()?;
    Ok(summarize(&outcomes))
}

/// Combines per-shot outcomes, in order, into a [`ShotsResult`].
pub fn summarize(outcomes: &[ShotOutcome]) -> ShotsResult {
    let n = outcomes.len();
    let mut acc = [[Compensated::default(); 2]; 16];
    let mut inf_sum = Compensated::default();
    let mut inf_sq = Compensated::default();
    for o in outcomes {
        for (k, v) in o.spin_state.matrix().iter().enumerate() {
            acc[k][0].add(v.re);
            acc[k][1].add(v.im);
        }
        let inf = o.fidelity.infidelity();
        inf_sum.add(inf);
        inf_sq.add(inf * inf);
    }
    let nf = n as f64;
    let mean = DMatrix::from_iterator(4, 4, acc.iter().map(|c| C64::new(c[0].value() / nf, c[1].value() / nf)));
    let layout = HilbertLayout::qubits(2).expect("two qubits");
    let mean_rho = DensityMatrix::from_matrix_unchecked(layout.clone(), mean.clone());
    let fid = fidelity_unchecked(&mean_rho);

    let std_error = if n > 1 {
        let loo: Vec<f64> = outcomes
            .iter()
            .map(|o| {
                let m = (&mean * C64::new(nf, 0.0) - o.spin_state.matrix()) / C64::new(nf - 1.0, 0.0);
                fidelity_unchecked(&DensityMatrix::from_matrix_unchecked(layout.clone(), m)).phase_insensitive
            })
            .collect();
        let loo_mean = loo.iter().sum::<f64>() / nf;
        ((nf - 1.0) / nf * loo.iter().map(|f| (f - loo_mean).powi(2)).sum::<f64>()).sqrt()
    } else {
        0.0
    };
    let mean_inf = inf_sum.value() / nf;
    let shot_se = if n > 1 {
        ((inf_sq.value() / nf - mean_inf * mean_inf).max(0.0) * nf / (nf - 1.0) / nf).sqrt()
    } else {
        0.0
    };
    ShotsResult {
        n_shots: n,
        fidelity: fid,
        infidelity: fid.infidelity(),
        std_error,
        mean_shot_infidelity: mean_inf,
        mean_shot_std_error: shot_se,
        mean_state: mean.iter().map(|c| (c.re, c.im)).collect(),
        max_trace_deviation: outcomes.iter().map(|o| o.max_trace_deviation).fold(0.0, f64::max),
        max_hermiticity_deviation: outcomes.iter().map(|o| o.max_hermiticity_deviation).fold(0.0, f64::max),
        min_eigenvalue: outcomes.iter().filter_map(|o| o.min_eigenvalue).reduce(f64::min),
        total_steps: outcomes.iter().map(|o| o.steps).sum(),
    }
}
