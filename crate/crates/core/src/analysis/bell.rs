use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, HilbertLayout, StateTolerances, C64};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// (|↑↑⟩ − i|↓↓⟩)/√2 in the basis (↑↑, ↑↓, ↓↑, ↓↓), the state the ideal
/// gate prepares from |↑↑⟩.
pub fn bell_target() -> [C64; 4] {
    bell_target_with_phase(-std::f64::consts::FRAC_PI_2)
}

/// (|↑↑⟩ + e^{iφ}|↓↓⟩)/√2.
pub fn bell_target_with_phase(phi: f64) -> [C64; 4] {
    let z = C64::new(0.0, 0.0);
    [C64::new(FRAC_1_SQRT_2, 0.0), z, z, C64::from_polar(FRAC_1_SQRT_2, phi)]
}

/// P↑↑, P↑↓ + P↓↑, P↓↓.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinPopulations {
    pub p_uu: f64,
    pub p_mixed: f64,
    pub p_dd: f64,
}

impl SpinPopulations {
    pub fn new(p_uu: f64, p_mixed: f64, p_dd: f64) -> Result<Self> {
        let p = Self { p_uu, p_mixed, p_dd };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ps = [self.p_uu, self.p_mixed, self.p_dd];
        if ps.iter().any(|p| !(-1e-12..=1.0 + 1e-12).contains(p)) || (ps.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("populations {ps:?} are not a distribution")));
        }
        Ok(())
    }

    /// Π = P↓↓ + P↑↑ − P↑↓,↓↑
    pub fn parity(&self) -> f64 {
        self.p_dd + self.p_uu - self.p_mixed
    }

    /// P↑↑ + P↓↓
    pub fn even(&self) -> f64 {
        self.p_uu + self.p_dd
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_uu, self.p_mixed, self.p_dd]
    }
}

pub(crate) fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    let expected = HilbertLayout::qubits(2)?;
    if rho.layout() != &expected {
        return Err(Error::LayoutMismatch { expected: 4, found: rho.dim() });
    }
    Ok(())
}

pub fn populations(rho: &DensityMatrix) -> Result<SpinPopulations> {
    require_two_qubits(rho)?;
    let m = rho.matrix();
    Ok(SpinPopulations { p_uu: m[(0, 0)].re, p_mixed: m[(1, 1)].re + m[(2, 2)].re, p_dd: m[(3, 3)].re })
}

/// Both fidelity measures of a two-qubit state against the Bell target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// ⟨Ψ|ρ|Ψ⟩ for the fixed target (|↑↑⟩ − i|↓↓⟩)/√2.
    pub phase_sensitive: f64,
    /// ½(P↑↑ + P↓↓) + |ρ↑↑,↓↓|, the overlap with the best phase-matched
    /// target; this is what a parity-fringe measurement yields.
    pub phase_insensitive: f64,
    /// ½(P↑↑ + P↓↓)
    pub population_half_sum: f64,
    /// |ρ↑↑,↓↓|
    pub coherence_magnitude: f64,
    /// arg ρ↓↓,↑↑, the relative phase φ of (|↑↑⟩ + e^{iφ}|↓↓⟩)
    pub coherence_phase: f64,
}

impl FidelityReport {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.phase_insensitive
    }
}

/// Fidelity of a valid two-qubit density matrix.
pub fn fidelity(rho: &DensityMatrix) -> Result<FidelityReport> {
    require_two_qubits(rho)?;
    rho.validate(&StateTolerances { hermiticity: 1e-8, trace: 1e-8, min_eigenvalue: -1e-8 })?;
    Ok(fidelity_unchecked(rho))
}

pub(crate) fn fidelity_unchecked(rho: &DensityMatrix) -> FidelityReport {
    let m = rho.matrix();
    let half_sum = 0.5 * (m[(0, 0)].re + m[(3, 3)].re);
    let coh = m[(3, 0)];
    FidelityReport {
        phase_sensitive: rho.overlap_pure(&bell_target()),
        phase_insensitive: half_sum + coh.norm(),
        population_half_sum: half_sum,
        coherence_magnitude: coh.norm(),
        coherence_phase: coh.arg(),
    }
}

/// F = ½(P↑↑ + P↓↓) + |A_Π|/2.
pub fn assemble_fidelity(even_population: f64, parity_amplitude: f64) -> f64 {
    (even_population + parity_amplitude.abs()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn l2() -> HilbertLayout {
        HilbertLayout::qubits(2).unwrap()
    }

    #[test]
    fn target_properties() {
        let psi = bell_target();
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
        assert_eq!(psi[1], C64::new(0.0, 0.0));
        let rho = DensityMatrix::pure(l2(), &psi).unwrap();
        let red = crate::quantum::partial_trace(&rho, &[0]).unwrap();
        assert!((red.matrix() - DMatrix::identity(2, 2) * C64::new(0.5, 0.0)).norm() < 1e-15);
        let f = fidelity(&rho).unwrap();
        assert!((f.phase_sensitive - 1.0).abs() < 1e-14);
        assert!((f.phase_insensitive - 1.0).abs() < 1e-14);
        assert!((f.coherence_phase + std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn mixed_and_mismatched_phase() {
        let mixed = DensityMatrix::maximally_mixed(l2());
        let f = fidelity(&mixed).unwrap();
        assert!((f.phase_sensitive - 0.25).abs() < 1e-15);
        assert!((f.phase_insensitive - 0.25).abs() < 1e-15);
        let plus = DensityMatrix::pure(l2(), &bell_target_with_phase(std::f64::consts::FRAC_PI_2)).unwrap();
        let f = fidelity(&plus).unwrap();
        assert!(f.phase_sensitive.abs() < 1e-15);
        assert!((f.phase_insensitive - 1.0).abs() < 1e-15);
        let p = populations(&mixed).unwrap();
        assert_eq!(p.as_array(), [0.25, 0.5, 0.25]);
    }

    #[test]
    fn assembly_formula() {
        // 0.99 and 0.975 are inexact in binary; their exact mean sits one ulp
        // below the double nearest 0.9825
        assert!((assemble_fidelity(0.990, 0.975) - 0.9825).abs() <= f64::EPSILON);
        assert_eq!(assemble_fidelity(0.5, -0.25), 0.375);
    }

    #[test]
    fn populations_of_basis_states() {
        let rho = DensityMatrix::basis(l2(), 1).unwrap();
        assert_eq!(populations(&rho).unwrap().as_array(), [0.0, 1.0, 0.0]);
        let bell = DensityMatrix::pure(l2(), &bell_target()).unwrap();
        let p = populations(&bell).unwrap();
        assert!((p.p_uu - 0.5).abs() < 1e-15 && p.p_mixed == 0.0 && (p.p_dd - 0.5).abs() < 1e-15);
        assert!(populations(&DensityMatrix::maximally_mixed(HilbertLayout::qubits(1).unwrap())).is_err());
    }
}
