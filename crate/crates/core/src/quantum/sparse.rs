//! Compressed sparse row storage for complex matrices.
//!
//! Operators on the truncated spin-motion space have a handful of nonzeros
//! per row (ladder operators are bidiagonal, Paulis are permutations), so
//! every product the propagator needs is done against this format.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ptr: vec![0; rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    /// Builds from (row, col, value) triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = Self { rows, cols, row_ptr, col_idx, values };
        m.prune();
        m
    }

    pub fn from_dense(d: &DMatrix<C64>) -> Self {
        let (rows, cols) = d.shape();
        let mut trip = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let v = d[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(rows, cols, trip)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            d[(i, j)] = v;
        }
        d
    }

    fn prune(&mut self) {
        if self.values.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return;
        }
        let trip: Vec<_> = self.iter().filter(|t| t.2 != C64::new(0.0, 0.0)).collect();
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut values = Vec::with_capacity(trip.len());
        for (r, c, v) in trip {
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..self.rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.iter().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.iter().map(|(i, j, v)| (j, i, v)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.prune();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        Self::from_triplets(self.rows, self.cols, self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Sparse-sparse product with a dense row accumulator.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut acc = vec![C64::new(0.0, 0.0); other.cols];
        let mut mark = vec![usize::MAX; other.cols];
        let mut trip = Vec::new();
        for r in 0..self.rows {
            let mut touched = Vec::new();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (mid, a) = (self.col_idx[k], self.values[k]);
                for kk in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let c = other.col_idx[kk];
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * other.values[kk];
                }
            }
            for c in touched {
                trip.push((r, c, acc[c]));
            }
        }
        Self::from_triplets(self.rows, other.cols, trip)
    }

    /// Kronecker product; `self` is the more significant factor.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let trip = self.iter().flat_map(|(i, j, a)| {
            other.iter().map(move |(k, l, b)| (i * other.rows + k, j * other.cols + l, a * b))
        });
        Self::from_triplets(rows, cols, trip)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr = s;
        }
    }

    /// `y += alpha A x`.
    pub fn mul_vec_acc(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr += alpha * s;
        }
    }

    /// `out += alpha A B` for a column-major dense `B`.
    pub fn mul_dense_acc(&self, alpha: C64, b: &[C64], out: &mut [C64]) {
        let n = self.cols;
        let m = b.len() / n;
        debug_assert_eq!(out.len(), self.rows * m);
        for j in 0..m {
            self.mul_vec_acc(alpha, &b[j * n..(j + 1) * n], &mut out[j * self.rows..(j + 1) * self.rows]);
        }
    }

    /// `out = A B` for a column-major dense `B` with `self.cols` rows.
    pub fn mul_dense(&self, b: &[C64], out: &mut [C64]) {
        let n = self.cols;
        debug_assert_eq!(b.len() % n, 0);
        let m = b.len() / n;
        debug_assert_eq!(out.len(), self.rows * m);
        for j in 0..m {
            self.mul_vec(&b[j * n..(j + 1) * n], &mut out[j * self.rows..(j + 1) * self.rows]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dense_roundtrip_and_products_match_dense_algebra() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 1.0), c(3.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        );
        let b = DMatrix::from_row_slice(
            3,
            3,
            &[c(0.0, 1.0), c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, -1.0), c(0.0, 0.0)],
        );
        let sa = CsrMatrix::from_dense(&a);
        let sb = CsrMatrix::from_dense(&b);
        assert_eq!(sa.to_dense(), a);
        assert_eq!(sa.matmul(&sb).to_dense(), &a * &b);
        assert_eq!(sa.add(&sb).to_dense(), &a + &b);
        assert_eq!(sa.adjoint().to_dense(), a.adjoint());
        assert_eq!(sa.kron(&sb).to_dense(), a.kronecker(&b));

        let mut out = vec![c(0.0, 0.0); 9];
        sa.mul_dense(b.as_slice(), &mut out);
        let expect = &a * &b;
        assert_eq!(out.as_slice(), expect.as_slice());
    }

    #[test]
    fn duplicate_triplets_sum_and_cancellations_drop() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0)), (1, 0, c(2.0, 0.0)), (1, 0, c(1.0, 0.0))]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), c(3.0, 0.0));
        assert_eq!(m.get(0, 1), c(0.0, 0.0));
    }
}
