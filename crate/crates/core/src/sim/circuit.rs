//! Gate lists, gadget compilation and statevector application.

use std::sync::Arc;

use crate::error::{QetuError, Result};
use crate::linalg::CMat;
use crate::pauli::{Pauli, PauliString};
use crate::scalar::{c, c_re, Real, C};

use super::state::StateVector;

/// `Rx(a) = exp(-i a X / 2)`, `Rz(a) = exp(-i a Z / 2)`; a gadget is `exp(-i angle P / 2)`.
#[derive(Clone, Debug)]
pub enum Gate<T: Real> {
    H(usize),
    Rx(usize, T),
    Rz(usize, T),
    Cnot { control: usize, target: usize },
    /// `exp(-i angle P/2)`. With `sign_control = Some(a)` the angle is negated when qubit `a`
    /// is 1 (equivalently, `P` gains a Z on `a`). With `enable_control = Some(a)` the rotation
    /// only acts when qubit `a` is 1.
    Gadget {
        string: PauliString,
        angle: T,
        sign_control: Option<usize>,
        enable_control: Option<usize>,
    },
    /// Dense unitaries on qubits `0..control` selected by qubit `control`.
    /// Only used by the exact-evolution backend; carries no gate count.
    ControlledDense { control: usize, on_zero: Arc<CMat<T>>, on_one: Arc<CMat<T>> },
}

/// Elementary gate totals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GateCounts {
    pub total: usize,
    pub two_qubit: usize,
}

impl std::ops::Add for GateCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { total: self.total + o.total, two_qubit: self.two_qubit + o.two_qubit }
    }
}

impl std::ops::Mul<usize> for GateCounts {
    type Output = Self;
    fn mul(self, k: usize) -> Self {
        Self { total: self.total * k, two_qubit: self.two_qubit * k }
    }
}

impl<T: Real> Gate<T> {
    fn max_qubit(&self) -> Option<usize> {
        match self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Rz(q, _) => Some(*q),
            Gate::Cnot { control, target } => Some(*control.max(target)),
            Gate::Gadget { string, sign_control, enable_control, .. } => {
                let s = (64 - string.support().leading_zeros() as usize).saturating_sub(1);
                Some(s.max(sign_control.unwrap_or(0)).max(enable_control.unwrap_or(0)))
            }
            Gate::ControlledDense { control, .. } => Some(*control),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Some(q) = self.max_qubit() {
            if q >= n {
                return Err(QetuError::InvalidCircuit(format!("gate touches qubit {q} in a {n}-qubit register")));
            }
        }
        match self {
            Gate::Cnot { control, target } if control == target => {
                Err(QetuError::InvalidCircuit("CNOT control equals target".into()))
            }
            Gate::Gadget { string, sign_control, enable_control, .. } => {
                for a in sign_control.iter().chain(enable_control.iter()) {
                    if string.support() >> a & 1 == 1 {
                        return Err(QetuError::InvalidCircuit(format!("control qubit {a} overlaps the gadget string")));
                    }
                }
                if string.n_qubits() != n {
                    return Err(QetuError::InvalidCircuit("gadget string register mismatch".into()));
                }
                if string.is_identity() && sign_control.is_none() {
                    // a bare phase; fold it into a neighbouring rotation instead
                    return Err(QetuError::InvalidCircuit("gadget on the identity string".into()));
                }
                Ok(())
            }
            Gate::ControlledDense { control, on_zero, on_one } => {
                let dim = 1usize << control;
                if on_zero.rows != dim || on_zero.cols != dim || on_one.rows != dim || on_one.cols != dim {
                    return Err(QetuError::InvalidCircuit("controlled block has the wrong dimension".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Elementary gates this gate expands to.
    pub fn counts(&self) -> GateCounts {
        match self {
            Gate::H(_) | Gate::Rx(..) | Gate::Rz(..) => GateCounts { total: 1, two_qubit: 0 },
            Gate::Cnot { .. } => GateCounts { total: 1, two_qubit: 1 },
            Gate::Gadget { string, sign_control, enable_control, .. } => {
                let w = string.weight() + sign_control.is_some() as usize;
                if w == 0 {
                    return GateCounts::default();
                }
                let basis = 2 * (string.x_mask().count_ones() as usize);
                let ladder = 2 * (w - 1);
                let (rz, extra_cx) = if enable_control.is_some() { (2, 2) } else { (1, 0) };
                GateCounts { total: basis + ladder + rz + extra_cx, two_qubit: ladder + extra_cx }
            }
            Gate::ControlledDense { .. } => GateCounts::default(),
        }
    }
}

/// Ordered gate list over a fixed register.
#[derive(Clone, Debug)]
pub struct Circuit<T: Real = f64> {
    n: usize,
    gates: Vec<Gate<T>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(n: usize) -> Self {
        Self { n, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate<T>) -> Result<()> {
        g.validate(self.n)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit<T>) -> Result<()> {
        if other.n > self.n {
            return Err(QetuError::InvalidCircuit("appended circuit is larger than the register".into()));
        }
        for g in &other.gates {
            let g = if other.n == self.n { g.clone() } else { widen(g, self.n) };
            self.push(g)?;
        }
        Ok(())
    }

    /// Elementary gate totals after gadget compilation.
    pub fn counts(&self) -> GateCounts {
        self.gates.iter().fold(GateCounts::default(), |acc, g| acc + g.counts())
    }

    /// Expands every gadget into H/Rx/Rz/CNOT.
    pub fn compile(&self) -> Circuit<T> {
        let mut out = Circuit::new(self.n);
        for g in &self.gates {
            match g {
                Gate::Gadget { string, angle, sign_control, enable_control } => {
                    compile_gadget(&mut out.gates, string, *angle, *sign_control, *enable_control)
                }
                other => out.gates.push(other.clone()),
            }
        }
        out
    }

    /// Dense unitary of the circuit (column `b` is the image of basis state `b`).
    pub fn to_dense(&self) -> Result<CMat<T>> {
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for b in 0..dim {
            let s = apply_circuit(self, &StateVector::basis(self.n, b))?;
            for (r, a) in s.amplitudes().iter().enumerate() {
                m.set(r, b, *a);
            }
        }
        Ok(m)
    }
}

fn widen<T: Real>(g: &Gate<T>, n: usize) -> Gate<T> {
    match g {
        Gate::Gadget { string, angle, sign_control, enable_control } => Gate::Gadget {
            string: PauliString::from_masks(n, string.x_mask(), string.z_mask()),
            angle: *angle,
            sign_control: *sign_control,
            enable_control: *enable_control,
        },
        other => other.clone(),
    }
}

fn compile_gadget<T: Real>(
    out: &mut Vec<Gate<T>>,
    string: &PauliString,
    angle: T,
    sign_control: Option<usize>,
    enable_control: Option<usize>,
) {
    let mut support: Vec<usize> = (0..string.n_qubits()).filter(|&q| string.get(q) != Pauli::I).collect();
    if let Some(a) = sign_control {
        support.push(a);
        support.sort_unstable();
    }
    if support.is_empty() {
        return;
    }
    let half_pi = T::FRAC_PI_2();
    for &q in &support {
        match string.get(q) {
            Pauli::X => out.push(Gate::H(q)),
            Pauli::Y => out.push(Gate::Rx(q, half_pi)),
            _ => {}
        }
    }
    for w in support.windows(2) {
        out.push(Gate::Cnot { control: w[0], target: w[1] });
    }
    let pivot = *support.last().unwrap();
    match enable_control {
        None => out.push(Gate::Rz(pivot, angle)),
        Some(a) => {
            let half = angle * T::lit(0.5);
            out.push(Gate::Rz(pivot, half));
            out.push(Gate::Cnot { control: a, target: pivot });
            out.push(Gate::Rz(pivot, -half));
            out.push(Gate::Cnot { control: a, target: pivot });
        }
    }
    for w in support.windows(2).rev() {
        out.push(Gate::Cnot { control: w[0], target: w[1] });
    }
    for &q in &support {
        match string.get(q) {
            Pauli::X => out.push(Gate::H(q)),
            Pauli::Y => out.push(Gate::Rx(q, -half_pi)),
            _ => {}
        }
    }
}

/// Applies the circuit to a copy of `s`.
pub fn apply_circuit<T: Real>(circ: &Circuit<T>, s: &StateVector<T>) -> Result<StateVector<T>> {
    let mut out = s.clone();
    apply_in_place(circ, &mut out)?;
    Ok(out)
}

pub fn apply_in_place<T: Real>(circ: &Circuit<T>, s: &mut StateVector<T>) -> Result<()> {
    if circ.n != s.n_qubits() {
        return Err(QetuError::InvalidCircuit(format!(
            "circuit on {} qubits applied to a {}-qubit state",
            circ.n,
            s.n_qubits()
        )));
    }
    for g in &circ.gates {
        apply_gate(g, s.amplitudes_mut());
    }
    Ok(())
}

pub(crate) fn apply_gate<T: Real>(g: &Gate<T>, amps: &mut [C<T>]) {
    match g {
        Gate::H(q) => {
            let r = T::FRAC_1_SQRT_2();
            single_qubit(amps, *q, [[c_re(r), c_re(r)], [c_re(r), c_re(-r)]]);
        }
        Gate::Rx(q, a) => {
            let h = *a * T::lit(0.5);
            let (co, si) = (h.cos(), h.sin());
            single_qubit(amps, *q, [[c_re(co), c(T::zero(), -si)], [c(T::zero(), -si), c_re(co)]]);
        }
        Gate::Rz(q, a) => {
            let h = *a * T::lit(0.5);
            let bit = 1usize << q;
            let p0 = c(h.cos(), -h.sin());
            let p1 = p0.conj();
            for (i, v) in amps.iter_mut().enumerate() {
                *v *= if i & bit == 0 { p0 } else { p1 };
            }
        }
        Gate::Cnot { control, target } => {
            let cb = 1usize << control;
            let tb = 1usize << target;
            for i in 0..amps.len() {
                if i & cb != 0 && i & tb == 0 {
                    amps.swap(i, i | tb);
                }
            }
        }
        Gate::Gadget { string, angle, sign_control, enable_control } => {
            let zextra = sign_control.map_or(0, |a| 1u64 << a);
            let enable = enable_control.map_or(0, |a| 1u64 << a);
            gadget_kernel(amps, string.x_mask(), string.z_mask() | zextra, string.y_count(), enable, *angle);
        }
        Gate::ControlledDense { control, on_zero, on_one } => {
            let dim = 1usize << control;
            for (branch, u) in [(0usize, on_zero), (1usize, on_one)] {
                let off = branch * dim;
                let hi = amps.len() / (2 * dim);
                for h in 0..hi {
                    let base = h * 2 * dim + off;
                    let v = u.matvec(&amps[base..base + dim]);
                    amps[base..base + dim].copy_from_slice(&v);
                }
            }
        }
    }
}

fn single_qubit<T: Real>(amps: &mut [C<T>], q: usize, m: [[C<T>; 2]; 2]) {
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let a = amps[i];
            let b = amps[i | bit];
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[i | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// `exp(-i angle/2 P)` with `P|b> = i^ny (-1)^{|b & z|} |b ^ x>`, restricted to indices with
/// all `enable` bits set (no restriction when `enable == 0`).
pub(crate) fn gadget_kernel<T: Real>(amps: &mut [C<T>], x: u64, z: u64, ny: u32, enable: u64, angle: T) {
    let h = angle * T::lit(0.5);
    let (co, si) = (h.cos(), h.sin());
    if x == 0 {
        let plus = c(co, -si);
        let minus = c(co, si);
        for (i, v) in amps.iter_mut().enumerate() {
            let i = i as u64;
            if i & enable != enable {
                continue;
            }
            *v *= if (i & z).count_ones() & 1 == 0 { plus } else { minus };
        }
        return;
    }
    let iy = match ny % 4 {
        0 => c(T::one(), T::zero()),
        1 => c(T::zero(), T::one()),
        2 => c(-T::one(), T::zero()),
        _ => c(T::zero(), -T::one()),
    };
    // -i sin * i^ny
    let k = c(T::zero(), -si) * iy;
    let top = 1u64 << (63 - x.leading_zeros());
    for i in 0..amps.len() as u64 {
        if i & top != 0 || i & enable != enable {
            continue;
        }
        let j = i ^ x;
        let a = amps[i as usize];
        let b = amps[j as usize];
        // (P psi)[i] = phase(j) b, (P psi)[j] = phase(i) a
        let pj = if (j & z).count_ones() & 1 == 0 { k } else { -k };
        let pi = if (i & z).count_ones() & 1 == 0 { k } else { -k };
        amps[i as usize] = a * co + pj * b;
        amps[j as usize] = b * co + pi * a;
    }
}
