use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quantum::{embed, fock_ladder, qubit_ops, HilbertLayout, Operator, C64};

use super::{GateParams, PulseEnvelope};

/// Scalar time dependence of one Hamiltonian term.
#[derive(Clone)]
pub enum Coefficient {
    Constant(C64),
    Function(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
    /// `values[k]` holds on `[edges[k], edges[k+1])`; the end values extend
    /// outside the covered range.
    Piecewise { edges: Vec<f64>, values: Vec<C64> },
}

impl Coefficient {
    pub fn function(f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn real(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(move |t| C64::new(f(t), 0.0)))
    }

    pub fn piecewise(edges: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if values.is_empty() || edges.len() != values.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "piecewise coefficient needs n+1 edges for n values, got {} and {}",
                edges.len(),
                values.len()
            )));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("piecewise edges must increase strictly".into()));
        }
        Ok(Self::Piecewise { edges, values })
    }

    pub fn at(&self, t: f64) -> C64 {
        match self {
            Self::Constant(c) => *c,
            Self::Function(f) => f(t),
            Self::Piecewise { edges, values } => {
                let k = edges[1..edges.len() - 1].partition_point(|&e| e <= t);
                values[k]
            }
        }
    }

    fn edges(&self) -> &[f64] {
        match self {
            Self::Piecewise { edges, .. } => edges,
            _ => &[],
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Function(_) => write!(f, "Function(..)"),
            Self::Piecewise { edges, values } => write!(f, "Piecewise({} pieces from {})", values.len(), edges[0]),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HamiltonianTerm {
    pub operator: Operator,
    pub coefficient: Coefficient,
}

/// H(t) = Σ_k c_k(t) O_k. Terms need not be Hermitian on their own; the
/// builders here always add Hermitian-conjugate pairs.
#[derive(Clone, Debug)]
pub struct TimeDependentOperator {
    layout: HilbertLayout,
    terms: Vec<HamiltonianTerm>,
    breakpoints: Vec<f64>,
}

impl TimeDependentOperator {
    pub fn new(layout: HilbertLayout) -> Self {
        Self { layout, terms: Vec::new(), breakpoints: Vec::new() }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, operator: Operator, coefficient: Coefficient) -> Result<()> {
        if operator.layout() != &self.layout {
            return Err(Error::LayoutMismatch { expected: self.layout.dim(), found: operator.dim() });
        }
        if operator.is_zero() {
            return Ok(());
        }
        self.breakpoints.extend_from_slice(coefficient.edges());
        self.terms.push(HamiltonianTerm { operator, coefficient });
        Ok(())
    }

    pub fn push_constant(&mut self, operator: Operator) -> Result<()> {
        self.push(operator, Coefficient::Constant(C64::new(1.0, 0.0)))
    }

    pub fn extend(&mut self, other: TimeDependentOperator) -> Result<()> {
        if other.layout != self.layout {
            return Err(Error::LayoutMismatch { expected: self.layout.dim(), found: other.layout.dim() });
        }
        self.terms.extend(other.terms);
        self.breakpoints.extend(other.breakpoints);
        Ok(())
    }

    /// Times where some coefficient is not smooth. Sorted, deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.breakpoints.clone();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    pub fn add_breakpoints(&mut self, times: impl IntoIterator<Item = f64>) {
        self.breakpoints.extend(times);
    }

    pub fn coefficients_at(&self, t: f64) -> Vec<C64> {
        self.terms.iter().map(|term| term.coefficient.at(t)).collect()
    }

    pub fn evaluate(&self, t: f64) -> Operator {
        self.terms.iter().fold(Operator::zero(&self.layout), |acc, term| {
            &acc + &term.operator.scale(term.coefficient.at(t))
        })
    }
}

/// Collective operators of a layout, built once and reused by every
/// Hamiltonian factory. Mode 0 is the gate mode, mode 1 (if present) the
/// spectator mode.
#[derive(Clone, Debug)]
pub struct GateOperators {
    pub layout: HilbertLayout,
    /// Σ_j σ⁺_j
    pub s_plus: Operator,
    pub s_minus: Operator,
    /// Σ_j σˣ_j
    pub s_x: Operator,
    /// Σ_j σᶻ_j
    pub s_z: Operator,
    /// Single-qubit σᶻ_j embedded in the layout.
    pub sigma_z: Vec<Operator>,
    pub a: Operator,
    pub a_dag: Operator,
    pub n_gate: Operator,
    pub spectator: Option<(Operator, Operator)>,
}

impl GateOperators {
    pub fn new(layout: &HilbertLayout) -> Result<Self> {
        if layout.qubit_count() == 0 {
            return Err(Error::InvalidDimension("gate Hamiltonians need at least one qubit".into()));
        }
        let q = qubit_ops();
        let nq = layout.qubit_count();
        let sum = |op: &Operator| -> Result<Operator> {
            let mut acc = Operator::zero(layout);
            for j in 0..nq {
                acc = &acc + &embed(op, j, layout)?;
            }
            Ok(acc)
        };
        let sigma_z = (0..nq).map(|j| embed(&q.z, j, layout)).collect::<Result<Vec<_>>>()?;
        let mode_ops = |m: usize| -> Result<(Operator, Operator)> {
            let f = layout.mode_factor(m).ok_or(Error::MissingMode(if m == 0 { "gate" } else { "spectator" }))?;
            let a = embed(&fock_ladder(layout.factor_dim(f)?)?, f, layout)?;
            let ad = a.adjoint();
            Ok((a, ad))
        };
        let (a, a_dag) = mode_ops(0)?;
        let n_gate = &a_dag * &a;
        let spectator = if layout.mode_count() > 1 { Some(mode_ops(1)?) } else { None };
        Ok(Self {
            layout: layout.clone(),
            s_plus: sum(&q.plus)?,
            s_minus: sum(&q.minus)?,
            s_x: sum(&q.x)?,
            s_z: sum(&q.z)?,
            sigma_z,
            a,
            a_dag,
            n_gate,
            spectator,
        })
    }

    /// H = Ω/2 S_x (a e^{iδt} + a† e^{−iδt}).
    pub fn ms_ideal(&self, params: &GateParams) -> Result<TimeDependentOperator> {
        let mut h = TimeDependentOperator::new(self.layout.clone());
        let op = (&self.s_x * &self.a).scale(0.5 * params.omega_gate);
        let op_dag = op.adjoint();
        let d = params.detuning;
        h.push(op, Coefficient::function(move |t| C64::from_polar(1.0, d * t)))?;
        h.push(op_dag, Coefficient::function(move |t| C64::from_polar(1.0, -d * t)))?;
        Ok(h)
    }

    /// `ms_ideal` with the phases e^{±iδt} frozen at the midpoint of each of
    /// `pieces` equal intervals over the gate. Exactly integrable by
    /// exponentiation, so it serves as a reference problem.
    pub fn ms_piecewise(&self, params: &GateParams, pieces: usize) -> Result<TimeDependentOperator> {
        if pieces == 0 {
            return Err(Error::InvalidParameter("piecewise Hamiltonian needs at least one piece".into()));
        }
        let op = (&self.s_x * &self.a).scale(0.5 * params.omega_gate);
        let edges: Vec<f64> = (0..=pieces).map(|k| params.gate_time * k as f64 / pieces as f64).collect();
        let mids: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let d = params.detuning;
        let plus = mids.iter().map(|&t| C64::from_polar(1.0, d * t)).collect();
        let minus = mids.iter().map(|&t| C64::from_polar(1.0, -d * t)).collect();
        let mut h = TimeDependentOperator::new(self.layout.clone());
        h.push(op.adjoint(), Coefficient::piecewise(edges.clone(), minus)?)?;
        h.push(op, Coefficient::piecewise(edges, plus)?)?;
        Ok(h)
    }

    /// Bichromatic form with separate red and blue sideband strengths, both
    /// shaped by `envelope`:
    /// H = ½ env(t) [(Ω_B S⁻ + Ω_R S⁺) a e^{iδt}] + h.c.
    pub fn ms_extended(&self, params: &GateParams, envelope: &PulseEnvelope) -> Result<TimeDependentOperator> {
        let mut h = TimeDependentOperator::new(self.layout.clone());
        let spin = &self.s_minus.scale(0.5 * params.rabi_blue) + &self.s_plus.scale(0.5 * params.rabi_red);
        let op = &spin * &self.a;
        let op_dag = op.adjoint();
        let d = params.detuning;
        let env = *envelope;
        h.push(op, Coefficient::function(move |t| C64::from_polar(env.drive(t), d * t)))?;
        h.push(op_dag, Coefficient::function(move |t| C64::from_polar(env.drive(t), -d * t)))?;
        h.add_breakpoints(envelope.breakpoints());
        Ok(h)
    }

    /// H_m = δ_ε(t) a†a on the gate mode.
    pub fn mode_instability(&self, profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<TimeDependentOperator> {
        let mut h = TimeDependentOperator::new(self.layout.clone());
        h.push(self.n_gate.clone(), Coefficient::real(move |t| profile(t)))?;
        Ok(h)
    }

    /// H_z = Δ_ε/2 Σ_j σᶻ_j.
    pub fn aczs(&self, delta_z: f64) -> Operator {
        self.s_z.scale(0.5 * delta_z)
    }

    /// Off-resonant coupling to the spectator mode, detuned by Δν + δ:
    /// H = Ω_r1/2 env(t) S_x (a₁ e^{i(Δν+δ)t} + h.c.).
    pub fn spectator(&self, params: &GateParams, envelope: &PulseEnvelope) -> Result<TimeDependentOperator> {
        let (a1, _) = self.spectator.as_ref().ok_or(Error::MissingMode("spectator"))?;
        let mut h = TimeDependentOperator::new(self.layout.clone());
        let op = (&self.s_x * a1).scale(0.5 * params.spectator_rabi);
        let op_dag = op.adjoint();
        let w = params.mode_spacing() + params.detuning;
        let env = *envelope;
        h.push(op, Coefficient::function(move |t| C64::from_polar(env.drive(t), w * t)))?;
        h.push(op_dag, Coefficient::function(move |t| C64::from_polar(env.drive(t), -w * t)))?;
        h.add_breakpoints(envelope.breakpoints());
        Ok(h)
    }
}

pub fn build_ms_ideal(params: &GateParams, layout: &HilbertLayout) -> Result<TimeDependentOperator> {
    GateOperators::new(layout)?.ms_ideal(params)
}

pub fn build_ms_extended(
    params: &GateParams,
    envelope: &PulseEnvelope,
    layout: &HilbertLayout,
) -> Result<TimeDependentOperator> {
    GateOperators::new(layout)?.ms_extended(params, envelope)
}

pub fn build_mode_instability(
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    layout: &HilbertLayout,
) -> Result<TimeDependentOperator> {
    GateOperators::new(layout)?.mode_instability(profile)
}

pub fn build_aczs(delta_z: f64, layout: &HilbertLayout) -> Result<Operator> {
    Ok(GateOperators::new(layout)?.aczs(delta_z))
}

pub fn build_spectator(
    params: &GateParams,
    envelope: &PulseEnvelope,
    layout: &HilbertLayout,
) -> Result<TimeDependentOperator> {
    GateOperators::new(layout)?.spectator(params, envelope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::EnvelopeShape;

    fn layout() -> HilbertLayout {
        HilbertLayout::new(2, vec![6]).unwrap()
    }

    #[test]
    fn builders_are_hermitian_at_all_times() {
        let l = layout();
        let p = GateParams::paper_defaults().with_rabi_imbalance(0.05);
        let env = PulseEnvelope::new(EnvelopeShape::ErfRamp, p.ramp_time, p.gate_time).unwrap();
        let ops = GateOperators::new(&l).unwrap();
        let ideal = ops.ms_ideal(&p).unwrap();
        let ext = ops.ms_extended(&p, &env).unwrap();
        let drift = ops.mode_instability(Arc::new(|t| 1e3 * t.sin())).unwrap();
        for k in 0..50 {
            let t = p.gate_time * k as f64 / 49.0;
            for h in [&ideal, &ext, &drift] {
                let ht = h.evaluate(t);
                assert!(ht.hermitian_deviation() <= 1e-12 * ht.max_abs().max(1.0));
            }
        }
        assert!(ops.aczs(5.0).is_hermitian());
    }

    #[test]
    fn balanced_extended_equals_ideal() {
        let l = layout();
        let p = GateParams::paper_defaults();
        let env = PulseEnvelope::rectangular(p.gate_time);
        let ops = GateOperators::new(&l).unwrap();
        let ideal = ops.ms_ideal(&p).unwrap();
        let ext = ops.ms_extended(&p, &env).unwrap();
        for k in 0..20 {
            let t = 37e-6 * k as f64;
            let diff = &ideal.evaluate(t) - &ext.evaluate(t);
            assert!(diff.max_abs() < 1e-9 * p.omega_gate, "t = {t}");
        }
    }

    #[test]
    fn ideal_matrix_elements() {
        // ⟨↑↑,1| H |↓↑,0⟩ = Ω/2 · e^{−iδt} via the σˣ₁ a† term
        let l = layout();
        let p = GateParams::paper_defaults();
        let h = build_ms_ideal(&p, &l).unwrap();
        let t = 123e-6;
        let ht = h.evaluate(t);
        let fock = 6;
        let up_up_1 = 1;
        let down_up_0 = 2 * fock;
        let expected = C64::from_polar(0.5 * p.omega_gate, -p.detuning * t);
        assert!((ht.get(up_up_1, down_up_0) - expected).norm() < 1e-9);
    }

    #[test]
    fn spectator_requires_second_mode() {
        let p = GateParams::paper_defaults();
        let env = PulseEnvelope::rectangular(p.gate_time);
        assert!(matches!(build_spectator(&p, &env, &layout()), Err(Error::MissingMode(_))));
        let l2 = HilbertLayout::new(2, vec![3, 3]).unwrap();
        let h = build_spectator(&p, &env, &l2).unwrap();
        assert!(h.evaluate(1e-4).is_hermitian());
    }

    #[test]
    fn piecewise_coefficient_lookup() {
        let c = Coefficient::piecewise(vec![0.0, 1.0, 2.0], vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]).unwrap();
        assert_eq!(c.at(-1.0).re, 1.0);
        assert_eq!(c.at(0.5).re, 1.0);
        assert_eq!(c.at(1.0).re, 2.0);
        assert_eq!(c.at(5.0).re, 2.0);
        assert!(Coefficient::piecewise(vec![0.0, 0.0], vec![C64::new(1.0, 0.0)]).is_err());
        let mut h = TimeDependentOperator::new(layout());
        h.push(Operator::identity(&layout()), c).unwrap();
        assert_eq!(h.breakpoints(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn aczs_diagonal() {
        let l = HilbertLayout::new(2, vec![2]).unwrap();
        let hz = build_aczs(2.0, &l).unwrap();
        // |↑↑⟩ → +Δ, |↓↓⟩ → −Δ
        assert!((hz.get(0, 0).re - 2.0).abs() < 1e-15);
        assert!((hz.get(7, 7).re + 2.0).abs() < 1e-15);
        assert_eq!(hz.get(2, 2).re, 0.0);
    }
}
