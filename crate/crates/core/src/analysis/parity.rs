use std::io::{BufRead, Write};

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::bell::{populations, require_two_qubits, SpinPopulations};
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, C64};

/// U(φ) = exp(−i(π/4) Σ_j (cos φ σˣ_j + sin φ σʸ_j)) on two qubits.
pub fn analysis_pulse_unitary(phi: f64) -> DMatrix<C64> {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    // cos(π/4)·I − i sin(π/4)(cos φ σˣ + sin φ σʸ)
    let off = C64::new(0.0, -c) * C64::from_polar(1.0, -phi);
    let u = DMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), off, -off.conj(), C64::new(c, 0.0)]);
    u.kronecker(&u)
}

/// Applies the global π/2 analysis pulse of phase `phi`.
pub fn analysis_pulse(rho: &DensityMatrix, phi: f64) -> Result<DensityMatrix> {
    require_two_qubits(rho)?;
    let u = analysis_pulse_unitary(phi);
    let out = &u * rho.matrix() * u.adjoint();
    Ok(DensityMatrix::from_matrix_unchecked(rho.layout().clone(), out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityScan {
    pub phases: Vec<f64>,
    pub populations: Vec<SpinPopulations>,
    pub parity: Vec<f64>,
}

impl ParityScan {
    pub fn from_populations(phases: Vec<f64>, populations: Vec<SpinPopulations>) -> Result<Self> {
        if phases.len() != populations.len() {
            return Err(Error::InvalidParameter("one population triple per phase is required".into()));
        }
        let parity = populations.iter().map(SpinPopulations::parity).collect();
        Ok(Self { phases, populations, parity })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// CSV with header `phi_a,p_dd,p_mixed,p_uu,parity`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "phi_a,p_dd,p_mixed,p_uu,parity")?;
        for ((phi, p), par) in self.phases.iter().zip(&self.populations).zip(&self.parity) {
            writeln!(w, "{phi:.16e},{:.16e},{:.16e},{:.16e},{par:.16e}", p.p_dd, p.p_mixed, p.p_uu)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty parity CSV".into()))??;
        if header.trim() != "phi_a,p_dd,p_mixed,p_uu,parity" {
            return Err(Error::Format(format!("unexpected parity CSV header '{header}'")));
        }
        let (mut phases, mut pops) = (Vec::new(), Vec::new());
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("parity CSV line {}: {e}", n + 2)))?;
            if v.len() != 5 {
                return Err(Error::Format(format!("parity CSV line {}: expected 5 columns", n + 2)));
            }
            phases.push(v[0]);
            pops.push(SpinPopulations { p_uu: v[3], p_mixed: v[2], p_dd: v[1] });
        }
        Self::from_populations(phases, pops)
    }
}

pub fn parity_scan(rho: &DensityMatrix, phases: &[f64]) -> Result<ParityScan> {
    if phases.is_empty() {
        return Err(Error::InvalidParameter("phase grid is empty".into()));
    }
    let pops = phases
        .iter()
        .map(|&phi| populations(&analysis_pulse(rho, phi)?))
        .collect::<Result<Vec<_>>>()?;
    ParityScan::from_populations(phases.to_vec(), pops)
}

/// `n` equally spaced phases on [0, 2π).
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| crate::TWO_PI * k as f64 / n as f64).collect()
}

/// Π(φ) = A sin(2φ + φ₀) + C, fitted linearly as a sin 2φ + b cos 2φ + C.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    /// |A| ≥ 0
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub amplitude_std_error: f64,
    pub phase_std_error: f64,
    pub offset_std_error: f64,
    /// Covariance of (a, b, C).
    pub covariance: [[f64; 3]; 3],
    pub chi_square: f64,
    pub dof: usize,
}

/// Weighted least-squares fringe fit. `weights` are inverse variances; with
/// none, the covariance is scaled by the residual variance.
pub fn fit_fringe(scan: &ParityScan, weights: Option<&[f64]>) -> Result<FringeFit> {
    let n = scan.len();
    if n < 5 {
        return Err(Error::Fit(format!("fringe fit needs at least 5 points, got {n}")));
    }
    if let Some(w) = weights {
        if w.len() != n || w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Fit("weights must be positive, one per point".into()));
        }
    }
    let mut xtx = Matrix3::<f64>::zeros();
    let mut xty = Vector3::<f64>::zeros();
    let rows: Vec<Vector3<f64>> =
        scan.phases.iter().map(|&p| Vector3::new((2.0 * p).sin(), (2.0 * p).cos(), 1.0)).collect();
    for (i, (x, &y)) in rows.iter().zip(&scan.parity).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        xtx += x * x.transpose() * w;
        xty += x * (y * w);
    }
    let eig = xtx.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 1e-10 * hi) {
        return Err(Error::Fit("phase grid does not determine the fringe (rank-deficient design)".into()));
    }
    let inv = xtx.try_inverse().ok_or_else(|| Error::Fit("singular normal matrix".into()))?;
    let beta = inv * xty;
    let chi_square: f64 = rows
        .iter()
        .zip(&scan.parity)
        .enumerate()
        .map(|(i, (x, &y))| weights.map_or(1.0, |w| w[i]) * (y - x.dot(&beta)).powi(2))
        .sum();
    let dof = n - 3;
    let cov = if weights.is_some() { inv } else { inv * (chi_square / dof as f64) };
    let (a, b, c) = (beta[0], beta[1], beta[2]);
    let amp = a.hypot(b);
    let (amp_se, phase_se) = if amp > 1e-300 {
        let ga = Vector3::new(a / amp, b / amp, 0.0);
        let gp = Vector3::new(-b / (amp * amp), a / (amp * amp), 0.0);
        ((ga.transpose() * cov * ga)[0].max(0.0).sqrt(), (gp.transpose() * cov * gp)[0].max(0.0).sqrt())
    } else {
        ((0.5 * (cov[(0, 0)] + cov[(1, 1)])).max(0.0).sqrt(), std::f64::consts::PI)
    };
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cov[(i, j)];
        }
    }
    Ok(FringeFit {
        amplitude: amp,
        phase: b.atan2(a),
        offset: c,
        amplitude_std_error: amp_se,
        phase_std_error: phase_se,
        offset_std_error: cov[(2, 2)].max(0.0).sqrt(),
        covariance,
        chi_square,
        dof,
    })
}
