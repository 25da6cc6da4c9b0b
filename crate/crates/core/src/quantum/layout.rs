use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered description of the tensor factors of a Hilbert space.
///
/// Full system layouts carry at least one qubit. Single-factor sub-layouts
/// (one mode, one qubit) exist so that local operators and reduced states
/// can carry a layout too.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertLayout {
    qubit_count: usize,
    fock_dims: Vec<usize>,
}

impl HilbertLayout {
    pub fn new(qubit_count: usize, fock_dims: Vec<usize>) -> Result<Self> {
        if qubit_count == 0 {
            return Err(Error::InvalidDimension("a system layout needs at least one qubit".into()));
        }
        Self::from_parts(qubit_count, fock_dims)
    }

    /// Layout of a single truncated oscillator.
    pub fn mode(n_max: usize) -> Result<Self> {
        Self::from_parts(0, vec![n_max])
    }

    /// Layout of `n` qubits with no motion.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub(crate) fn from_parts(qubit_count: usize, fock_dims: Vec<usize>) -> Result<Self> {
        if qubit_count + fock_dims.len() == 0 {
            return Err(Error::InvalidDimension("layout has no factors".into()));
        }
        if let Some(&d) = fock_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(format!("Fock dimension {d} < 2")));
        }
        Ok(Self { qubit_count, fock_dims })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn fock_dims(&self) -> &[usize] {
        &self.fock_dims
    }

    pub fn mode_count(&self) -> usize {
        self.fock_dims.len()
    }

    pub fn factor_count(&self) -> usize {
        self.qubit_count + self.fock_dims.len()
    }

    /// Factor index of motional mode `m`.
    pub fn mode_factor(&self, m: usize) -> Option<usize> {
        (m < self.fock_dims.len()).then_some(self.qubit_count + m)
    }

    pub fn factor_dim(&self, factor: usize) -> Result<usize> {
        if factor < self.qubit_count {
            Ok(2)
        } else {
            self.fock_dims
                .get(factor - self.qubit_count)
                .copied()
                .ok_or(Error::FactorOutOfRange { index: factor, factors: self.factor_count() })
        }
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        std::iter::repeat(2).take(self.qubit_count).chain(self.fock_dims.iter().copied()).collect()
    }

    pub fn dim(&self) -> usize {
        (1usize << self.qubit_count) * self.fock_dims.iter().product::<usize>()
    }

    pub fn is_qubit(&self, factor: usize) -> bool {
        factor < self.qubit_count
    }

    /// Tensor product layout `self ⊗ other`. Qubits must stay ahead of modes.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if !self.fock_dims.is_empty() && other.qubit_count > 0 {
            return Err(Error::InvalidDimension("qubit factors must precede motional factors".into()));
        }
        let mut fock = self.fock_dims.clone();
        fock.extend_from_slice(&other.fock_dims);
        Self::from_parts(self.qubit_count + other.qubit_count, fock)
    }

    /// Layout restricted to the given factors (kept in layout order).
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        let keep = self.normalize_keep(keep)?;
        let qubits = keep.iter().filter(|&&f| f < self.qubit_count).count();
        let fock = keep.iter().filter(|&&f| f >= self.qubit_count).map(|&f| self.fock_dims[f - self.qubit_count]).collect();
        Self::from_parts(qubits, fock)
    }

    fn normalize_keep(&self, keep: &[usize]) -> Result<Vec<usize>> {
        if keep.is_empty() {
            return Err(Error::InvalidParameter("empty factor set".into()));
        }
        let mut k = keep.to_vec();
        k.sort_unstable();
        k.dedup();
        if let Some(&bad) = k.iter().find(|&&f| f >= self.factor_count()) {
            return Err(Error::FactorOutOfRange { index: bad, factors: self.factor_count() });
        }
        Ok(k)
    }

    /// Splits every flat basis index into (kept index, environment index).
    pub fn split(&self, keep: &[usize]) -> Result<FactorSplit> {
        let keep = self.normalize_keep(keep)?;
        let dims = self.factor_dims();
        let kept_layout = self.subset(&keep)?;
        let env_dims: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).map(|f| dims[f]).collect();
        let env_dim: usize = env_dims.iter().product();
        let mut groups = vec![Vec::with_capacity(kept_layout.dim()); env_dim];
        let mut digits = vec![0usize; dims.len()];
        for flat in 0..self.dim() {
            let (mut k, mut e) = (0usize, 0usize);
            for (f, &d) in digits.iter().enumerate() {
                if keep.contains(&f) {
                    k = k * dims[f] + d;
                } else {
                    e = e * dims[f] + d;
                }
            }
            groups[e].push((k, flat));
            // odometer increment, last factor fastest
            for f in (0..dims.len()).rev() {
                digits[f] += 1;
                if digits[f] < dims[f] {
                    break;
                }
                digits[f] = 0;
            }
        }
        Ok(FactorSplit { kept_layout, groups })
    }
}

/// Index bookkeeping for partial traces: for each environment basis state,
/// the (kept index, flat index) pairs that share it.
#[derive(Clone, Debug)]
pub struct FactorSplit {
    pub kept_layout: HilbertLayout,
    pub groups: Vec<Vec<(usize, usize)>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_is_product_of_factors() {
        let l = HilbertLayout::new(2, vec![25, 25]).unwrap();
        assert_eq!(l.dim(), 2500);
        assert_eq!(l.factor_dims(), vec![2, 2, 25, 25]);
        assert_eq!(l.mode_factor(1), Some(3));
        assert_eq!(l.mode_factor(2), None);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(HilbertLayout::new(0, vec![4]).is_err());
        assert!(HilbertLayout::new(2, vec![1]).is_err());
        assert!(HilbertLayout::mode(1).is_err());
        let q = HilbertLayout::qubits(2).unwrap();
        let m = HilbertLayout::mode(3).unwrap();
        assert!(m.concat(&q).is_err());
        assert_eq!(q.concat(&m).unwrap(), HilbertLayout::new(2, vec![3]).unwrap());
    }

    #[test]
    fn split_groups_cover_every_index_once() {
        let l = HilbertLayout::new(2, vec![3]).unwrap();
        let s = l.split(&[0, 1]).unwrap();
        assert_eq!(s.groups.len(), 3);
        let mut all: Vec<usize> = s.groups.iter().flatten().map(|p| p.1).collect();
        all.sort();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
        // flat index 5 = (q0=0, q1=1, n=2): kept 1, env 2
        assert!(s.groups[2].contains(&(1, 5)));
    }
}
