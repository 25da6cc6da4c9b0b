use nalgebra::DMatrix;

use super::integrator::{Dop853, OdeSystem, StepStats};
use crate::error::{Error, Result};
use crate::gate::TimeDependentOperator;
use crate::quantum::sparse::CsrMatrix;
use crate::quantum::{partial_trace, DensityMatrix, HilbertLayout, Operator, C64, EIGEN_CHECK_MAX_DIM};

/// Collapse operator L with rate γ, contributing γ·D[L]ρ.
#[derive(Clone, Debug)]
pub struct CollapseTerm {
    pub operator: Operator,
    pub rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size, s. `None` leaves it to the controller.
    pub max_step: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-10, max_step: None }
    }
}

impl Tolerances {
    /// Default tolerances with max_step = 1/(50·f_max) for the fastest
    /// angular frequency `omega_max` in the problem.
    pub fn for_frequency(omega_max: f64) -> Self {
        Self { max_step: Some(crate::TWO_PI / (50.0 * omega_max)), ..Self::default() }
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        Self { rel_tol: self.rel_tol / factor, abs_tol: self.abs_tol / factor, ..self }
    }
}

/// Initial condition. The diagonal form avoids materializing a dense
/// matrix for large thermal states.
#[derive(Clone, Debug)]
pub enum InitialState {
    Density(DensityMatrix),
    Diagonal { layout: HilbertLayout, populations: Vec<f64> },
}

impl InitialState {
    pub fn layout(&self) -> &HilbertLayout {
        match self {
            Self::Density(rho) => rho.layout(),
            Self::Diagonal { layout, .. } => layout,
        }
    }

    /// Populations if the state is diagonal in the product basis.
    pub fn diagonal(&self) -> Option<Vec<f64>> {
        match self {
            Self::Density(rho) => rho.is_diagonal().then(|| (0..rho.dim()).map(|k| rho.matrix()[(k, k)].re).collect()),
            Self::Diagonal { populations, .. } => Some(populations.clone()),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            Self::Density(rho) => rho.clone(),
            Self::Diagonal { layout, populations } => {
                let m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    populations.len(),
                    populations.iter().map(|&p| C64::new(p, 0.0)),
                ));
                DensityMatrix::from_matrix_unchecked(layout.clone(), m)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Self::Diagonal { layout, populations } = self {
            if populations.len() != layout.dim() {
                return Err(Error::LayoutMismatch { expected: layout.dim(), found: populations.len() });
            }
            let total: f64 = populations.iter().sum();
            if populations.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidState(format!("diagonal initial state sums to {total}")));
            }
        }
        Ok(())
    }
}

impl From<DensityMatrix> for InitialState {
    fn from(rho: DensityMatrix) -> Self {
        Self::Density(rho)
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionProblem {
    pub hamiltonian: TimeDependentOperator,
    pub collapse_terms: Vec<CollapseTerm>,
    pub initial_state: InitialState,
    pub t_final: f64,
    /// Sorted output times in [0, t_final]; empty means just `t_final`.
    pub output_grid: Vec<f64>,
    pub tolerances: Tolerances,
    /// Factors kept in the stored states; `None` stores full states.
    pub keep: Option<Vec<usize>>,
}

impl EvolutionProblem {
    pub fn new(hamiltonian: TimeDependentOperator, initial_state: impl Into<InitialState>, t_final: f64) -> Self {
        Self {
            hamiltonian,
            collapse_terms: Vec::new(),
            initial_state: initial_state.into(),
            t_final,
            output_grid: Vec::new(),
            tolerances: Tolerances::default(),
            keep: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.initial_state.validate()?;
        let layout = self.initial_state.layout();
        if self.hamiltonian.layout() != layout {
            return Err(Error::LayoutMismatch { expected: layout.dim(), found: self.hamiltonian.layout().dim() });
        }
        for c in &self.collapse_terms {
            if c.operator.layout() != layout {
                return Err(Error::LayoutMismatch { expected: layout.dim(), found: c.operator.dim() });
            }
            if !(c.rate >= 0.0) || !c.rate.is_finite() {
                return Err(Error::InvalidParameter(format!("collapse rate {} must be >= 0", c.rate)));
            }
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidParameter(format!("t_final = {}", self.t_final)));
        }
        if self.output_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("output grid must be sorted".into()));
        }
        if self.output_grid.iter().any(|&t| !(0.0..=self.t_final).contains(&t)) {
            return Err(Error::InvalidParameter("output grid must lie in [0, t_final]".into()));
        }
        let tol = &self.tolerances;
        if !(tol.rel_tol > 0.0 && tol.abs_tol > 0.0) || tol.max_step.is_some_and(|h| !(h > 0.0)) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if let Some(keep) = &self.keep {
            layout.split(keep)?;
        }
        Ok(())
    }

    fn output_times(&self) -> Vec<f64> {
        if self.output_grid.is_empty() {
            vec![self.t_final]
        } else {
            self.output_grid.clone()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Per stored state: |tr ρ − 1|.
    pub trace_deviation: Vec<f64>,
    /// Per stored state: max |ρ − ρ†|.
    pub hermiticity_deviation: Vec<f64>,
    /// Per stored state, when the stored dimension allows an
    /// eigendecomposition.
    pub min_eigenvalue: Vec<Option<f64>>,
    pub steps: StepStats,
    /// Number of pure states propagated (1 for the density-matrix path).
    pub ensemble_size: usize,
}

impl Diagnostics {
    pub fn max_trace_deviation(&self) -> f64 {
        self.trace_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_hermiticity_deviation(&self) -> f64 {
        self.hermiticity_deviation.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest eigenvalue seen over all checked states.
    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.min_eigenvalue.iter().flatten().copied().reduce(f64::min)
    }

    fn record(&mut self, rho: &DensityMatrix) {
        self.trace_deviation.push((rho.trace() - C64::new(1.0, 0.0)).norm());
        self.hermiticity_deviation.push(rho.hermiticity_deviation());
        self.min_eigenvalue.push((rho.dim() <= EIGEN_CHECK_MAX_DIM).then(|| rho.min_eigenvalue()));
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory has at least one state")
    }
}

/// Populations below this weight are dropped from a diagonal initial state.
const ENSEMBLE_WEIGHT_CUTOFF: f64 = 1e-14;

/// H(t) with coefficients taken inside the current integration window, so
/// that piecewise coefficients never see the neighbouring segment.
struct CompiledHamiltonian<'a> {
    terms: Vec<(&'a CsrMatrix, &'a crate::gate::Coefficient)>,
    /// Constant non-Hermitian part −i/2 Σγ L†L.
    decay: Option<CsrMatrix>,
}

impl<'a> CompiledHamiltonian<'a> {
    fn new(h: &'a TimeDependentOperator, collapse: &[CollapseTerm]) -> Self {
        let terms = h.terms().iter().map(|t| (t.operator.matrix(), &t.coefficient)).collect();
        let active: Vec<_> = collapse.iter().filter(|c| c.rate > 0.0).collect();
        let decay = (!active.is_empty()).then(|| {
            active.iter().fold(CsrMatrix::zeros(h.layout().dim(), h.layout().dim()), |acc, c| {
                let l = c.operator.matrix();
                acc.add(&l.adjoint().matmul(l).scale(C64::new(0.0, -0.5 * c.rate)))
            })
        });
        Self { terms, decay }
    }

    fn coefficients(&self, t: f64, window: (f64, f64)) -> Vec<C64> {
        let eta = 1e-12 * (window.1 - window.0);
        let te = t.clamp(window.0 + eta, window.1 - eta);
        self.terms.iter().map(|(_, c)| c.at(te)).collect()
    }
}

/// ψ' = −i H(t) ψ.
struct PureSystem<'a> {
    h: CompiledHamiltonian<'a>,
    dim: usize,
}

impl OdeSystem for PureSystem<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, window: (f64, f64), y: &[C64], dy: &mut [C64]) {
        dy.fill(C64::new(0.0, 0.0));
        let coeffs = self.h.coefficients(t, window);
        for ((m, _), c) in self.h.terms.iter().zip(&coeffs) {
            m.mul_vec_acc(C64::new(c.im, -c.re), y, dy);
        }
    }
}

/// ρ' = −i(X − X†) + Σγ L ρ L†, X = H_eff ρ, with ρ column-major.
struct LindbladSystem<'a> {
    h: CompiledHamiltonian<'a>,
    jumps: Vec<(CsrMatrix, f64)>,
    dim: usize,
    scratch: std::cell::RefCell<(Vec<C64>, Vec<C64>)>,
}

impl OdeSystem for LindbladSystem<'_> {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn rhs(&self, t: f64, window: (f64, f64), rho: &[C64], drho: &mut [C64]) {
        let d = self.dim;
        let mut scratch = self.scratch.borrow_mut();
        let (x, y) = &mut *scratch;
        x.fill(C64::new(0.0, 0.0));
        let coeffs = self.h.coefficients(t, window);
        for ((m, _), c) in self.h.terms.iter().zip(&coeffs) {
            m.mul_dense_acc(*c, rho, x);
        }
        if let Some(decay) = &self.h.decay {
            decay.mul_dense_acc(C64::new(1.0, 0.0), rho, x);
        }
        for j in 0..d {
            for i in 0..d {
                let diff = x[j * d + i] - x[i * d + j].conj();
                drho[j * d + i] = C64::new(diff.im, -diff.re);
            }
        }
        for (l, rate) in &self.jumps {
            // y = L ρ, then drho += γ L y†
            y.fill(C64::new(0.0, 0.0));
            l.mul_dense_acc(C64::new(1.0, 0.0), rho, y);
            for j in 0..d {
                for i in 0..j {
                    let a = y[j * d + i];
                    y[j * d + i] = y[i * d + j].conj();
                    y[i * d + j] = a.conj();
                }
                y[j * d + j] = y[j * d + j].conj();
            }
            l.mul_dense_acc(C64::new(*rate, 0.0), y, drho);
        }
    }
}

fn solver(tol: &Tolerances) -> Dop853 {
    let mut s = Dop853::new(tol.rel_tol, tol.abs_tol);
    if let Some(h) = tol.max_step {
        s.max_step = h;
    }
    s
}

/// Merged, sorted stop times in (0, t_final]: outputs plus breakpoints.
fn stop_times(problem: &EvolutionProblem, outputs: &[f64]) -> Vec<f64> {
    let mut stops: Vec<f64> = outputs.to_vec();
    stops.extend(problem.hamiltonian.breakpoints().into_iter().filter(|&b| b > 0.0 && b < problem.t_final));
    stops.push(problem.t_final);
    stops.retain(|&t| t > 0.0);
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops
}

/// Propagates the master equation and returns states on the output grid.
///
/// Without collapse terms and with a diagonal initial state, each populated
/// basis state is propagated as a pure state and the ensemble is summed at
/// the output times; otherwise the full density matrix is integrated.
pub fn evolve(problem: &EvolutionProblem) -> Result<Trajectory> {
    problem.validate()?;
    let has_dissipation = problem.collapse_terms.iter().any(|c| c.rate > 0.0);
    match problem.initial_state.diagonal() {
        Some(pops) if !has_dissipation => evolve_ensemble(problem, &pops),
        _ => evolve_density(problem),
    }
}

fn store(problem: &EvolutionProblem, rho: DensityMatrix) -> Result<DensityMatrix> {
    match &problem.keep {
        Some(keep) => partial_trace(&rho, keep),
        None => Ok(rho),
    }
}

fn evolve_density(problem: &EvolutionProblem) -> Result<Trajectory> {
    let layout = problem.initial_state.layout().clone();
    let d = layout.dim();
    let sys = LindbladSystem {
        h: CompiledHamiltonian::new(&problem.hamiltonian, &problem.collapse_terms),
        jumps: problem
            .collapse_terms
            .iter()
            .filter(|c| c.rate > 0.0)
            .map(|c| (c.operator.matrix().clone(), c.rate))
            .collect(),
        dim: d,
        scratch: std::cell::RefCell::new((vec![C64::new(0.0, 0.0); d * d], vec![C64::new(0.0, 0.0); d * d])),
    };
    let outputs = problem.output_times();
    let solver = solver(&problem.tolerances);
    let mut y: Vec<C64> = problem.initial_state.to_density().matrix().as_slice().to_vec();
    let mut diag = Diagnostics { ensemble_size: 1, ..Default::default() };
    let mut states = Vec::with_capacity(outputs.len());
    let snapshot = |y: &[C64]| DensityMatrix::from_matrix_unchecked(layout.clone(), DMatrix::from_column_slice(d, d, y));
    let mut out_iter = outputs.iter().peekable();
    while out_iter.peek().is_some_and(|&&t| t == 0.0) {
        out_iter.next();
        let s = store(problem, snapshot(&y))?;
        diag.record(&s);
        states.push(s);
    }
    let (mut t, mut h) = (0.0, None);
    for stop in stop_times(problem, &outputs) {
        h = Some(solver.integrate(&sys, t, stop, &mut y, h, &mut diag.steps)?);
        t = stop;
        while out_iter.peek().is_some_and(|&&o| o == stop) {
            out_iter.next();
            let s = store(problem, snapshot(&y))?;
            diag.record(&s);
            states.push(s);
        }
    }
    Ok(Trajectory { times: outputs, states, diagnostics: diag })
}

/// Reduced (or full) density matrix of a weighted pure-state ensemble whose
/// member `k` occupies `psi[k*dim..(k+1)*dim]`.
fn ensemble_state(layout: &HilbertLayout, keep: Option<&[usize]>, weights: &[f64], psi: &[C64]) -> Result<DensityMatrix> {
    let d = layout.dim();
    match keep {
        None => {
            let mut m = DMatrix::<C64>::zeros(d, d);
            for (k, &w) in weights.iter().enumerate() {
                let v = &psi[k * d..(k + 1) * d];
                for j in 0..d {
                    let cj = v[j].conj() * w;
                    if cj == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for i in 0..d {
                        m[(i, j)] += v[i] * cj;
                    }
                }
            }
            Ok(DensityMatrix::from_matrix_unchecked(layout.clone(), m))
        }
        Some(keep) => {
            let split = layout.split(keep)?;
            let dk = split.kept_layout.dim();
            let mut m = DMatrix::<C64>::zeros(dk, dk);
            for (k, &w) in weights.iter().enumerate() {
                let v = &psi[k * d..(k + 1) * d];
                for group in &split.groups {
                    for &(kb, fb) in group {
                        let cb = v[fb].conj() * w;
                        for &(ka, fa) in group {
                            m[(ka, kb)] += v[fa] * cb;
                        }
                    }
                }
            }
            Ok(DensityMatrix::from_matrix_unchecked(split.kept_layout, m))
        }
    }
}

fn evolve_ensemble(problem: &EvolutionProblem, populations: &[f64]) -> Result<Trajectory> {
    let layout = problem.initial_state.layout().clone();
    let d = layout.dim();
    let mut members: Vec<(usize, f64)> = populations
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, p)| p > ENSEMBLE_WEIGHT_CUTOFF)
        .collect();
    if members.is_empty() {
        return Err(Error::InvalidState("initial state has no populated basis state".into()));
    }
    let total: f64 = members.iter().map(|m| m.1).sum();
    members.iter_mut().for_each(|m| m.1 /= total);
    let weights: Vec<f64> = members.iter().map(|m| m.1).collect();

    let outputs = problem.output_times();
    let stops = stop_times(problem, &outputs);
    let solver = solver(&problem.tolerances);
    let h_op = CompiledHamiltonian::new(&problem.hamiltonian, &[]);
    let sys = PureSystem { h: h_op, dim: d };
    let keep = problem.keep.as_deref();

    // snapshots[o] holds every member's state at output o
    let mut snapshots = vec![vec![C64::new(0.0, 0.0); d * members.len()]; outputs.len()];
    let mut diag = Diagnostics { ensemble_size: members.len(), ..Default::default() };
    for (k, &(basis, _)) in members.iter().enumerate() {
        let mut y = vec![C64::new(0.0, 0.0); d];
        y[basis] = C64::new(1.0, 0.0);
        let mut o = 0;
        while o < outputs.len() && outputs[o] == 0.0 {
            snapshots[o][k * d..(k + 1) * d].copy_from_slice(&y);
            o += 1;
        }
        let (mut t, mut h) = (0.0, None);
        for &stop in &stops {
            h = Some(solver.integrate(&sys, t, stop, &mut y, h, &mut diag.steps)?);
            t = stop;
            while o < outputs.len() && outputs[o] == stop {
                snapshots[o][k * d..(k + 1) * d].copy_from_slice(&y);
                o += 1;
            }
        }
    }
    let mut states = Vec::with_capacity(outputs.len());
    for snap in &snapshots {
        let s = ensemble_state(&layout, keep, &weights, snap)?;
        diag.record(&s);
        states.push(s);
    }
    Ok(Trajectory { times: outputs, states, diagnostics: diag })
}

/// D[L]ρ = LρL† − ½L†Lρ − ½ρL†L, evaluated densely.
pub fn dissipator_apply(l: &Operator, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
    if l.layout() != rho.layout() {
        return Err(Error::LayoutMismatch { expected: rho.dim(), found: l.dim() });
    }
    let ld = l.to_dense();
    let ldag = ld.adjoint();
    let r = rho.matrix();
    let ltl = &ldag * &ld;
    Ok(&ld * r * &ldag - (&ltl * r + r * &ltl) * C64::new(0.5, 0.0))
}
