use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use super::sparse::CsrMatrix;
use super::{DensityMatrix, HilbertLayout, C64, I, ONE, ZERO};
use crate::error::{Error, Result};

/// Linear operator bound to a layout. Stored sparse; see [`Operator::to_dense`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: HilbertLayout,
    data: CsrMatrix,
}

impl Operator {
    pub fn new(layout: HilbertLayout, data: CsrMatrix) -> Result<Self> {
        let d = layout.dim();
        if data.rows() != d || data.cols() != d {
            return Err(Error::LayoutMismatch { expected: d, found: data.rows().max(data.cols()) });
        }
        Ok(Self { layout, data })
    }

    pub fn from_dense(layout: HilbertLayout, m: &DMatrix<C64>) -> Result<Self> {
        Self::new(layout, CsrMatrix::from_dense(m))
    }

    pub fn identity(layout: &HilbertLayout) -> Self {
        Self { layout: layout.clone(), data: CsrMatrix::identity(layout.dim()) }
    }

    pub fn zero(layout: &HilbertLayout) -> Self {
        let d = layout.dim();
        Self { layout: layout.clone(), data: CsrMatrix::zeros(d, d) }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.data
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.data.to_dense()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data.get(i, j)
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), data: self.data.adjoint() }
    }

    pub fn scale(&self, s: impl Into<C64>) -> Self {
        Self { layout: self.layout.clone(), data: self.data.scale(s.into()) }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn is_zero(&self) -> bool {
        self.data.nnz() == 0
    }

    pub fn max_abs(&self) -> f64 {
        self.data.max_abs()
    }

    /// max |A − A†|.
    pub fn hermitian_deviation(&self) -> f64 {
        self.data.sub(&self.data.adjoint()).max_abs()
    }

    /// Hermitian to 1e-12 relative to the largest entry.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= 1e-12 * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self { layout: self.layout.concat(&other.layout)?, data: self.data.kron(&other.data) })
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim()];
        self.data.mul_vec(psi, &mut out);
        out
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.layout, other.layout, "operator layouts differ");
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator { layout: self.layout.clone(), data: self.data.add(&rhs.data) }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator { layout: self.layout.clone(), data: self.data.sub(&rhs.data) }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator { layout: self.layout.clone(), data: self.data.matmul(&rhs.data) }
    }
}

/// Annihilation operator on {|0⟩, …, |n_max−1⟩}: a|n⟩ = √n |n−1⟩.
pub fn fock_ladder(n_max: usize) -> Result<Operator> {
    if n_max < 2 {
        return Err(Error::InvalidDimension(format!("Fock cutoff {n_max} < 2")));
    }
    let trip = (1..n_max).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)));
    Operator::new(HilbertLayout::mode(n_max)?, CsrMatrix::from_triplets(n_max, n_max, trip))
}

/// a†a on the truncated basis.
pub fn number_operator(n_max: usize) -> Result<Operator> {
    let a = fock_ladder(n_max)?;
    Ok(&a.adjoint() * &a)
}

/// Single-qubit operators with |↑⟩ at index 0.
#[derive(Clone, Debug)]
pub struct QubitOps {
    pub x: Operator,
    pub y: Operator,
    pub z: Operator,
    /// σ⁺ = (σˣ + iσʸ)/2, maps |↓⟩ → |↑⟩.
    pub plus: Operator,
    pub minus: Operator,
}

pub fn qubit_ops() -> QubitOps {
    let layout = HilbertLayout::qubits(1).expect("one-qubit layout");
    let mk = |entries: [C64; 4]| {
        Operator::from_dense(layout.clone(), &DMatrix::from_row_slice(2, 2, &entries)).expect("2x2")
    };
    QubitOps {
        x: mk([ZERO, ONE, ONE, ZERO]),
        y: mk([ZERO, -I, I, ZERO]),
        z: mk([ONE, ZERO, ZERO, -ONE]),
        plus: mk([ZERO, ONE, ZERO, ZERO]),
        minus: mk([ZERO, ZERO, ONE, ZERO]),
    }
}

/// Lifts a single-factor operator onto `layout`, identity elsewhere.
pub fn embed(op: &Operator, factor: usize, layout: &HilbertLayout) -> Result<Operator> {
    let fdim = layout.factor_dim(factor)?;
    if op.dim() != fdim {
        return Err(Error::LayoutMismatch { expected: fdim, found: op.dim() });
    }
    let dims = layout.factor_dims();
    let left: usize = dims[..factor].iter().product();
    let right: usize = dims[factor + 1..].iter().product();
    let data = CsrMatrix::identity(left).kron(&op.data).kron(&CsrMatrix::identity(right));
    Operator::new(layout.clone(), data)
}

/// Thermal occupation probabilities renormalized over the truncated basis.
pub fn thermal_populations(nbar: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter(format!("mean phonon number {nbar} must be finite and >= 0")));
    }
    if n_max < 2 {
        return Err(Error::InvalidDimension(format!("Fock cutoff {n_max} < 2")));
    }
    let mut p = vec![0.0; n_max];
    if nbar == 0.0 {
        p[0] = 1.0;
        return Ok(p);
    }
    let q = nbar / (1.0 + nbar);
    let mut w = 1.0;
    for pn in p.iter_mut() {
        *pn = w;
        w *= q;
    }
    let norm: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= norm);
    Ok(p)
}

/// Thermal state of one truncated mode.
pub fn thermal_state(nbar: f64, n_max: usize) -> Result<DensityMatrix> {
    let p = thermal_populations(nbar, n_max)?;
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n_max, p.into_iter().map(|x| C64::new(x, 0.0))));
    Ok(DensityMatrix::from_matrix_unchecked(HilbertLayout::mode(n_max)?, m))
}

/// Reduced state over the kept factors.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let split = rho.layout().split(keep)?;
    let dk = split.kept_layout.dim();
    let m = rho.matrix();
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    for group in &split.groups {
        for &(ka, fa) in group {
            for &(kb, fb) in group {
                out[(ka, kb)] += m[(fa, fb)];
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(split.kept_layout, out))
}

/// tr(op ρ).
pub fn expect(op: &Operator, rho: &DensityMatrix) -> Result<C64> {
    if op.layout() != rho.layout() {
        return Err(Error::LayoutMismatch { expected: rho.layout().dim(), found: op.dim() });
    }
    let m = rho.matrix();
    Ok(op.matrix().iter().map(|(i, j, v)| v * m[(j, i)]).sum())
}
