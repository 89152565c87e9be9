//! QET-U circuits: phase rotations on the ancilla interleaved with controlled evolution.

use serde::{Deserialize, Serialize};

use crate::approx::{ite_target, synthesize, Direction, PhaseFactorSet};
use crate::error::{QetuError, Result};
use crate::scalar::Real;
use crate::sim::{
    apply_in_place, controlled_fwd_rev, controlled_single, Backend, Circuit, ExactBlocks, Gate, GateCounts, Orientation,
    StateVector,
};
use crate::spectrum::ScaledHamiltonian;

/// Success probabilities below this abort the run.
pub const MIN_SUCCESS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Controlled forward/reverse evolution per signal operator.
    FwdRev,
    /// One controlled evolution of doubled time per signal operator.
    ControlFree,
}

impl std::str::FromStr for Variant {
    type Err = QetuError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fwd_rev" | "fwd-rev" => Ok(Self::FwdRev),
            "control_free" | "control-free" => Ok(Self::ControlFree),
            other => Err(QetuError::Parse(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QetuPlan<T: Real = f64> {
    pub scaled: ScaledHamiltonian<T>,
    pub phases: PhaseFactorSet<T>,
    pub trotter_steps: usize,
    pub variant: Variant,
    /// Always the qubit directly above the system register.
    pub ancilla: usize,
    pub backend: Backend,
}

impl<T: Real> QetuPlan<T> {
    pub fn new(scaled: ScaledHamiltonian<T>, phases: PhaseFactorSet<T>, trotter_steps: usize) -> Self {
        let ancilla = scaled.n_qubits();
        Self { scaled, phases, trotter_steps, variant: Variant::FwdRev, ancilla, backend: Backend::Fast }
    }

    pub fn with_variant(mut self, v: Variant) -> Self {
        self.variant = v;
        self
    }

    pub fn with_backend(mut self, b: Backend) -> Self {
        self.backend = b;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.ancilla != self.scaled.n_qubits() {
            return Err(QetuError::InvalidCircuit(format!(
                "ancilla must be qubit {}, got {}",
                self.scaled.n_qubits(),
                self.ancilla
            )));
        }
        if self.phases.degree % 2 != 0 || self.phases.phases.len() != self.phases.degree + 1 {
            return Err(QetuError::InvalidCircuit("phase factors must have even degree".into()));
        }
        if !self.phases.is_symmetric() {
            return Err(QetuError::InvalidCircuit("phase factors are not symmetric".into()));
        }
        if self.trotter_steps == 0 && self.backend != Backend::Exact {
            return Err(QetuError::InvalidCircuit("Trotter steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct QetuResult<T: Real = f64> {
    /// Post-selected, normalized system state.
    pub state: StateVector<T>,
    pub success_prob: T,
    pub gate_count: usize,
    pub two_qubit_count: usize,
}

/// Circuit for the plan's backend. Gate order realizes the operator
/// `R(phi_0) S_1 R(phi_1) ... S_d R(phi_d)` (rightmost first), `S_k` of orientation `+` for odd `k`.
pub fn build_qetu<T: Real>(plan: &QetuPlan<T>) -> Result<Circuit<T>> {
    plan.validate()?;
    let a = plan.ancilla;
    let n = a + 1;
    let mut blocks: Vec<Circuit<T>> = Vec::with_capacity(2);
    match plan.backend {
        Backend::Exact => {
            let ex = ExactBlocks::new(&plan.scaled, a)?;
            for o in [Orientation::Plus, Orientation::Minus] {
                let mut c = Circuit::new(n);
                c.push(match plan.variant {
                    Variant::FwdRev => ex.fwd_rev(o),
                    Variant::ControlFree => ex.single(o),
                })?;
                blocks.push(c);
            }
        }
        Backend::Gate | Backend::Fast => {
            for o in [Orientation::Plus, Orientation::Minus] {
                blocks.push(match plan.variant {
                    Variant::FwdRev => controlled_fwd_rev(&plan.scaled, a, plan.trotter_steps, o)?,
                    Variant::ControlFree => controlled_single(&plan.scaled, a, plan.trotter_steps, o)?,
                });
            }
        }
    }
    let two = T::lit(2.0);
    let phases = &plan.phases.phases;
    let d = plan.phases.degree;
    let mut c = Circuit::new(n);
    // exp(i phi X) = Rx(-2 phi)
    c.push(Gate::Rx(a, -two * phases[d]))?;
    for k in (1..=d).rev() {
        c.extend(&blocks[if k % 2 == 1 { 0 } else { 1 }])?;
        c.push(Gate::Rx(a, -two * phases[k - 1]))?;
    }
    if plan.backend == Backend::Gate {
        Ok(c.compile())
    } else {
        Ok(c)
    }
}

/// Elementary gate counts of the product-formula build of the plan (independent of backend).
pub fn qetu_counts<T: Real>(plan: &QetuPlan<T>) -> Result<GateCounts> {
    let mut p = plan.clone();
    if p.backend == Backend::Exact {
        p.backend = Backend::Fast;
        p.trotter_steps = p.trotter_steps.max(1);
    }
    p.validate()?;
    let a = p.ancilla;
    let mut blocks = GateCounts::default();
    for o in [Orientation::Plus, Orientation::Minus] {
        let c = match p.variant {
            Variant::FwdRev => controlled_fwd_rev(&p.scaled, a, p.trotter_steps, o)?,
            Variant::ControlFree => controlled_single(&p.scaled, a, p.trotter_steps, o)?,
        };
        blocks = blocks + c.counts();
    }
    let d = p.phases.degree;
    // d/2 blocks of each orientation plus d + 1 ancilla rotations
    Ok(blocks * (d / 2) + GateCounts { total: d + 1, two_qubit: 0 })
}

/// A built circuit ready for repeated application.
pub struct PreparedQetu<T: Real> {
    circuit: Circuit<T>,
    counts: GateCounts,
    ancilla: usize,
}

impl<T: Real> PreparedQetu<T> {
    pub fn new(plan: &QetuPlan<T>) -> Result<Self> {
        Ok(Self { circuit: build_qetu(plan)?, counts: qetu_counts(plan)?, ancilla: plan.ancilla })
    }

    pub fn counts(&self) -> GateCounts {
        self.counts
    }

    pub fn circuit(&self) -> &Circuit<T> {
        &self.circuit
    }

    pub fn apply(&self, psi0: &StateVector<T>) -> Result<QetuResult<T>> {
        if psi0.n_qubits() != self.ancilla {
            return Err(QetuError::InvalidInput(format!(
                "state on {} qubits, plan expects {}",
                psi0.n_qubits(),
                self.ancilla
            )));
        }
        let mut s = psi0.with_ancilla();
        apply_in_place(&self.circuit, &mut s)?;
        let p = s.probability(self.ancilla, 0);
        if !(p.as_f64() >= MIN_SUCCESS) {
            return Err(QetuError::Projection { probability: p.as_f64() });
        }
        let (post, p) = s.postselect(self.ancilla, 0)?;
        let mut state = post.remove_qubit(self.ancilla, 0)?;
        state.normalize()?;
        Ok(QetuResult { state, success_prob: p, gate_count: self.counts.total, two_qubit_count: self.counts.two_qubit })
    }
}

/// Runs the plan on `psi0` and post-selects the ancilla on 0.
pub fn apply_qetu<T: Real>(plan: &QetuPlan<T>, psi0: &StateVector<T>) -> Result<QetuResult<T>> {
    PreparedQetu::new(plan)?.apply(psi0)
}

/// Sequence of identical imaginary-time fragments.
#[derive(Clone, Debug)]
pub struct FragmentRun<T: Real = f64> {
    pub fragments: Vec<QetuResult<T>>,
    /// Product of the fragment success probabilities after each fragment.
    pub cumulative_success: Vec<T>,
    pub phases: PhaseFactorSet<T>,
    pub total_gates: usize,
    pub total_two_qubit: usize,
}

/// Applies `exp(-H delta_tau)` (normalized at the ground end) `n_frag` times, feeding each
/// post-selected state into the next. Phases are solved once at the template's degree.
pub fn fragment_ite<T: Real>(template: &QetuPlan<T>, n_frag: usize, delta_tau: T, psi0: &StateVector<T>, tol: T, max_iter: usize) -> Result<FragmentRun<T>> {
    if n_frag == 0 {
        return Err(QetuError::InvalidInput("at least one fragment is required".into()));
    }
    let target = ite_target(&template.scaled, delta_tau, Direction::Forward)?;
    let (_, phases) = synthesize(&target, template.phases.degree, tol, max_iter)?;
    let mut plan = template.clone();
    plan.phases = phases.clone();
    let prepared = PreparedQetu::new(&plan)?;
    let mut state = psi0.clone();
    let mut fragments = Vec::with_capacity(n_frag);
    let mut cumulative = Vec::with_capacity(n_frag);
    let mut acc = T::one();
    for _ in 0..n_frag {
        let r = prepared.apply(&state)?;
        acc *= r.success_prob;
        cumulative.push(acc);
        state = r.state.clone();
        fragments.push(r);
    }
    let c = prepared.counts();
    Ok(FragmentRun {
        fragments,
        cumulative_success: cumulative,
        phases,
        total_gates: c.total * n_frag,
        total_two_qubit: c.two_qubit * n_frag,
    })
}
