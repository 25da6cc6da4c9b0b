use nalgebra::DMatrix;

use super::{HilbertLayout, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Validation thresholds for density matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateTolerances {
    /// max |ρ − ρ†|
    pub hermiticity: f64,
    /// |tr ρ − 1|
    pub trace: f64,
    /// smallest admissible eigenvalue
    pub min_eigenvalue: f64,
}

impl Default for StateTolerances {
    fn default() -> Self {
        Self { hermiticity: 1e-10, trace: 1e-10, min_eigenvalue: -1e-8 }
    }
}

/// Positivity is only checked by eigendecomposition up to this dimension.
pub const EIGEN_CHECK_MAX_DIM: usize = 512;

/// Hermitian, unit-trace state over a layout. Stored dense.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validated constructor using [`StateTolerances::default`].
    pub fn new(layout: HilbertLayout, matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerances(layout, matrix, &StateTolerances::default())
    }

    pub fn with_tolerances(layout: HilbertLayout, matrix: DMatrix<C64>, tol: &StateTolerances) -> Result<Self> {
        let d = layout.dim();
        if matrix.shape() != (d, d) {
            return Err(Error::LayoutMismatch { expected: d, found: matrix.nrows() });
        }
        let rho = Self { layout, matrix };
        rho.validate(tol)?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(layout: HilbertLayout, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.dim());
        Self { layout, matrix }
    }

    /// |ψ⟩⟨ψ| for a normalized state vector.
    pub fn pure(layout: HilbertLayout, psi: &[C64]) -> Result<Self> {
        if psi.len() != layout.dim() {
            return Err(Error::LayoutMismatch { expected: layout.dim(), found: psi.len() });
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector norm² = {norm}")));
        }
        let d = psi.len();
        let m = DMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj());
        Ok(Self { layout, matrix: m })
    }

    /// Computational basis projector |k⟩⟨k|.
    pub fn basis(layout: HilbertLayout, k: usize) -> Result<Self> {
        let d = layout.dim();
        if k >= d {
            return Err(Error::InvalidParameter(format!("basis index {k} >= dimension {d}")));
        }
        let mut psi = vec![ZERO; d];
        psi[k] = ONE;
        Self::pure(layout, &psi)
    }

    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        let m = DMatrix::from_diagonal_element(d, d, C64::new(1.0 / d as f64, 0.0));
        Self { layout, matrix: m }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().collect()
    }

    /// von Neumann entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues().into_iter().filter(|&l| l > 0.0).map(|l| -l * l.ln()).sum()
    }

    pub fn validate(&self, tol: &StateTolerances) -> Result<()> {
        let herm = self.hermiticity_deviation();
        if herm > tol.hermiticity {
            return Err(Error::InvalidState(format!("Hermiticity deviation {herm:.3e}")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        if self.dim() <= EIGEN_CHECK_MAX_DIM {
            let min = self.min_eigenvalue();
            if min < tol.min_eigenvalue {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(())
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self { layout: self.layout.concat(&other.layout)?, matrix: self.matrix.kronecker(&other.matrix) })
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.matrix[(i, j)] == ZERO))
    }

    /// Fidelity with a pure state, ⟨ψ|ρ|ψ⟩.
    pub fn overlap_pure(&self, psi: &[C64]) -> f64 {
        let d = self.dim();
        let mut acc = ZERO;
        for j in 0..d {
            if psi[j] == ZERO {
                continue;
            }
            for i in 0..d {
                acc += psi[i].conj() * self.matrix[(i, j)] * psi[j];
            }
        }
        acc.re
    }

    /// Uhlmann fidelity between two states, (tr √(√ρ σ √ρ))².
    pub fn fidelity_with(&self, other: &Self) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch { expected: self.dim(), found: other.dim() });
        }
        let sqrt_rho = hermitian_sqrt(&self.matrix);
        let inner = &sqrt_rho * &other.matrix * &sqrt_rho;
        let root = hermitian_sqrt(&inner);
        Ok(root.trace().re.powi(2))
    }
}

fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let d = m.nrows();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        let l = eig.eigenvalues[k].max(0.0).sqrt();
        let v = eig.eigenvectors.column(k);
        out += (&v * v.adjoint()) * C64::new(l, 0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_each_invariant() {
        let l = HilbertLayout::qubits(1).unwrap();
        let ok = DMatrix::from_row_slice(2, 2, &[C64::new(0.5, 0.0), C64::new(0.0, 0.5), C64::new(0.0, -0.5), C64::new(0.5, 0.0)]);
        assert!(DensityMatrix::new(l.clone(), ok).is_ok());

        let not_herm = DMatrix::from_row_slice(2, 2, &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), ZERO, C64::new(0.5, 0.0)]);
        assert!(DensityMatrix::new(l.clone(), not_herm).is_err());

        let bad_trace = DMatrix::from_diagonal_element(2, 2, C64::new(0.6, 0.0));
        assert!(DensityMatrix::new(l.clone(), bad_trace).is_err());

        let negative = DMatrix::from_row_slice(2, 2, &[C64::new(1.1, 0.0), ZERO, ZERO, C64::new(-0.1, 0.0)]);
        assert!(DensityMatrix::new(l, negative).is_err());
    }

    #[test]
    fn pure_state_entropy_and_fidelity() {
        let l = HilbertLayout::qubits(2).unwrap();
        let s = 0.5f64.sqrt();
        let psi = [C64::new(s, 0.0), ZERO, ZERO, C64::new(0.0, s)];
        let rho = DensityMatrix::pure(l.clone(), &psi).unwrap();
        assert!(rho.entropy().abs() < 1e-12);
        assert!((rho.overlap_pure(&psi) - 1.0).abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(l);
        assert!((mixed.entropy() - 4f64.ln()).abs() < 1e-12);
        assert!((rho.fidelity_with(&mixed).unwrap() - 0.25).abs() < 1e-12);
        assert!((rho.fidelity_with(&rho).unwrap() - 1.0).abs() < 1e-10);
    }
}
