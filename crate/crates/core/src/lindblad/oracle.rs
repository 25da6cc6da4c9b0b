use nalgebra::DMatrix;

use super::{EvolutionProblem, Trajectory};
use crate::error::{Error, Result};
use crate::gate::Coefficient;
use crate::quantum::{partial_trace, DensityMatrix, C64};

use super::engine::Diagnostics;

/// Largest Hilbert-space dimension the oracle accepts (superoperator 4096²).
pub const ORACLE_MAX_DIM: usize = 64;

/// Column-stacking Lindblad superoperator for a fixed Hamiltonian:
/// −i(I⊗H − Hᵀ⊗I) + Σγ(L̄⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I).
pub fn lindblad_superoperator(h: &DMatrix<C64>, collapse: &[(DMatrix<C64>, f64)]) -> DMatrix<C64> {
    let d = h.nrows();
    let id = DMatrix::<C64>::identity(d, d);
    let minus_i = C64::new(0.0, -1.0);
    let mut s = (id.kronecker(h) - h.transpose().kronecker(&id)) * minus_i;
    for (l, rate) in collapse {
        let ltl = l.adjoint() * l;
        let term = l.conjugate().kronecker(l)
            - (id.kronecker(&ltl) + ltl.transpose().kronecker(&id)) * C64::new(0.5, 0.0);
        s += term * C64::new(*rate, 0.0);
    }
    s
}

/// Propagates a problem whose Hamiltonian is piecewise constant by
/// exponentiating the superoperator on every constant interval. Meant as a
/// reference for small systems.
pub fn evolve_exact_oracle(problem: &EvolutionProblem) -> Result<Trajectory> {
    problem.validate()?;
    let layout = problem.initial_state.layout().clone();
    let d = layout.dim();
    if d > ORACLE_MAX_DIM {
        return Err(Error::TooLarge(d));
    }
    if problem.hamiltonian.terms().iter().any(|t| matches!(t.coefficient, Coefficient::Function(_))) {
        return Err(Error::InvalidParameter("oracle needs constant or piecewise coefficients".into()));
    }
    let outputs = if problem.output_grid.is_empty() { vec![problem.t_final] } else { problem.output_grid.clone() };
    let mut edges: Vec<f64> = outputs.clone();
    edges.extend(problem.hamiltonian.breakpoints().into_iter().filter(|&b| b > 0.0 && b < problem.t_final));
    edges.push(problem.t_final);
    edges.retain(|&t| t > 0.0);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let collapse: Vec<(DMatrix<C64>, f64)> =
        problem.collapse_terms.iter().filter(|c| c.rate > 0.0).map(|c| (c.operator.to_dense(), c.rate)).collect();
    let mut v = nalgebra::DVector::from_column_slice(problem.initial_state.to_density().matrix().as_slice());
    let snapshot = |v: &nalgebra::DVector<C64>| -> Result<DensityMatrix> {
        let rho = DensityMatrix::from_matrix_unchecked(layout.clone(), DMatrix::from_column_slice(d, d, v.as_slice()));
        match &problem.keep {
            Some(keep) => partial_trace(&rho, keep),
            None => Ok(rho),
        }
    };
    let mut diag = Diagnostics { ensemble_size: 1, ..Default::default() };
    let mut states = Vec::new();
    let mut o = 0;
    while o < outputs.len() && outputs[o] == 0.0 {
        states.push(snapshot(&v)?);
        o += 1;
    }
    let mut t = 0.0;
    for &stop in &edges {
        let mid = 0.5 * (t + stop);
        let h = problem.hamiltonian.evaluate(mid).to_dense();
        let gen = lindblad_superoperator(&h, &collapse) * C64::new(stop - t, 0.0);
        v = gen.exp() * v;
        t = stop;
        while o < outputs.len() && outputs[o] == stop {
            states.push(snapshot(&v)?);
            o += 1;
        }
    }
    for s in &states {
        diag.trace_deviation.push((s.trace() - C64::new(1.0, 0.0)).norm());
        diag.hermiticity_deviation.push(s.hermiticity_deviation());
        diag.min_eigenvalue.push(Some(s.min_eigenvalue()));
    }
    Ok(Trajectory { times: outputs, states, diagnostics: diag })
}
