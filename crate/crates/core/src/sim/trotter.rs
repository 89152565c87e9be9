//! Product-formula circuits and ancilla-controlled evolution blocks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{QetuError, Result};
use crate::linalg::CMat;
use crate::oracle;
use crate::pauli::{PauliString, PauliSum};
use crate::scalar::{from_c64, Real};
use crate::spectrum::ScaledHamiltonian;

use super::circuit::{Circuit, Gate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrotterOrder {
    First,
    Second,
}

/// Which sign the ancilla-0 branch carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// ancilla 0 -> `exp(+i(Ht + sigma))`
    Plus,
    /// ancilla 0 -> `exp(-i(Ht + sigma))`
    Minus,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Plus => Orientation::Minus,
            Orientation::Minus => Orientation::Plus,
        }
    }
}

/// How controlled evolution is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Gadgets expanded into H/Rx/Rz/CNOT before application.
    Gate,
    /// Gadgets applied with a direct two-amplitude kernel (same action as `Gate`).
    Fast,
    /// Exact dense evolution instead of a product formula.
    Exact,
}

impl std::str::FromStr for Backend {
    type Err = QetuError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gate" => Ok(Self::Gate),
            "fast" => Ok(Self::Fast),
            "exact" => Ok(Self::Exact),
            other => Err(QetuError::Parse(format!("unknown backend {other:?}"))),
        }
    }
}

fn hermitian_terms<T: Real>(h: &PauliSum<T>) -> Result<Vec<(PauliString, T)>> {
    if !h.is_hermitian() {
        return Err(QetuError::InvalidInput("Trotterized operator is not Hermitian".into()));
    }
    Ok(h.terms().filter(|(p, _)| !p.is_identity()).map(|(p, a)| (*p, a.re)).collect())
}

/// `steps` repetitions of `prod_k exp(-i a_k P_k time/steps)` in lexicographic term order
/// (first order), or the symmetric Strang product (second order). The identity term is a
/// global phase and is dropped.
pub fn trotter_circuit_order<T: Real>(h: &PauliSum<T>, time: T, steps: usize, order: TrotterOrder) -> Result<Circuit<T>> {
    if steps == 0 {
        return Err(QetuError::InvalidInput("Trotter steps must be at least 1".into()));
    }
    let terms = hermitian_terms(h)?;
    let dt = time / T::lit(steps as f64);
    let two = T::lit(2.0);
    let mut c = Circuit::new(h.n_qubits());
    let seq: Vec<(PauliString, T)> = match order {
        TrotterOrder::First => (0..steps).flat_map(|_| terms.iter().map(|(p, a)| (*p, *a * dt))).collect(),
        TrotterOrder::Second => merge((0..steps).flat_map(|_| strang_step(&terms, dt)).collect()),
    };
    for (p, w) in seq {
        c.push(Gate::Gadget { string: p, angle: two * w, sign_control: None, enable_control: None })?;
    }
    Ok(c)
}

/// First-order product formula for `exp(-i h time)`.
pub fn trotter_circuit<T: Real>(h: &PauliSum<T>, time: T, steps: usize) -> Result<Circuit<T>> {
    trotter_circuit_order(h, time, steps, TrotterOrder::First)
}

fn strang_step<T: Real>(terms: &[(PauliString, T)], dt: T) -> Vec<(PauliString, T)> {
    let half = T::lit(0.5);
    let k = terms.len();
    let mut v = Vec::with_capacity(2 * k);
    for (i, (p, a)) in terms.iter().enumerate() {
        v.push((*p, if i + 1 == k { *a * dt } else { *a * dt * half }));
    }
    for (p, a) in terms[..k.saturating_sub(1)].iter().rev() {
        v.push((*p, *a * dt * half));
    }
    v
}

/// Joins neighbouring factors on the same string.
fn merge<T: Real>(seq: Vec<(PauliString, T)>) -> Vec<(PauliString, T)> {
    let mut out: Vec<(PauliString, T)> = Vec::with_capacity(seq.len());
    for (p, w) in seq {
        match out.last_mut() {
            Some((q, v)) if *q == p => *v += w,
            _ => out.push((p, w)),
        }
    }
    out
}

/// Palindromic factor list `(P, w)` whose product `prod exp(-i w P)` approximates
/// `exp(-i h time)`. Steps alternate forward and reverse term order, with a symmetric middle
/// step when `steps` is odd; because the list reads the same backwards, negating every weight
/// gives the exact inverse of the product.
pub fn palindromic_sequence<T: Real>(h: &PauliSum<T>, time: T, steps: usize) -> Result<Vec<(PauliString, T)>> {
    if steps == 0 {
        return Err(QetuError::InvalidInput("Trotter steps must be at least 1".into()));
    }
    let terms = hermitian_terms(h)?;
    if terms.is_empty() {
        return Ok(Vec::new());
    }
    let dt = time / T::lit(steps as f64);
    let mut first = Vec::new();
    for s in 0..steps / 2 {
        if s % 2 == 0 {
            first.extend(terms.iter().map(|(p, a)| (*p, *a * dt)));
        } else {
            first.extend(terms.iter().rev().map(|(p, a)| (*p, *a * dt)));
        }
    }
    let mut seq = first.clone();
    if steps % 2 == 1 {
        let mid = if (steps / 2) % 2 == 0 {
            strang_step(&terms, dt)
        } else {
            let rev: Vec<_> = terms.iter().rev().cloned().collect();
            strang_step(&rev, dt)
        };
        seq.extend(mid);
    }
    seq.extend(first.into_iter().rev());
    Ok(merge(seq))
}

fn check_ancilla<T: Real>(h: &ScaledHamiltonian<T>, ancilla: usize) -> Result<()> {
    if ancilla < h.n_qubits() {
        return Err(QetuError::InvalidCircuit(format!(
            "ancilla {ancilla} collides with the {}-qubit system register",
            h.n_qubits()
        )));
    }
    Ok(())
}

/// Effective phase shift: `sigma` plus the identity coefficient times `t`.
fn sigma_eff<T: Real>(h: &ScaledHamiltonian<T>) -> T {
    h.sigma + h.base.identity_coeff() * h.t
}

/// Block-diagonal pair `ancilla 0 -> exp(+-i(Ht+sigma))`, `ancilla 1 -> exp(-+i(Ht+sigma))`.
///
/// Every gadget carries a Z on the ancilla (two extra CNOTs per term) and sigma is an ancilla Rz.
pub fn controlled_fwd_rev<T: Real>(h: &ScaledHamiltonian<T>, ancilla: usize, steps: usize, orientation: Orientation) -> Result<Circuit<T>> {
    check_ancilla(h, ancilla)?;
    let n = ancilla + 1;
    let seq = palindromic_sequence(&h.base, h.t, steps)?;
    let two = T::lit(2.0);
    // exp(+i w P Z_a) = gadget(P Z_a, -2w)
    let sgn = match orientation {
        Orientation::Plus => -T::one(),
        Orientation::Minus => T::one(),
    };
    let mut c = Circuit::new(n);
    let s = sigma_eff(h);
    if s != T::zero() {
        c.push(Gate::Rz(ancilla, sgn * two * s))?;
    }
    for (p, w) in seq {
        c.push(Gate::Gadget {
            string: PauliString::from_masks(n, p.x_mask(), p.z_mask()),
            angle: sgn * two * w,
            sign_control: Some(ancilla),
            enable_control: None,
        })?;
    }
    Ok(c)
}

/// Control-free variant: `ancilla 0 -> I`, `ancilla 1 -> exp(-+2i(Ht+sigma))`, realized as two
/// passes of the controlled product and an ancilla Rz (exact up to a global phase).
pub fn controlled_single<T: Real>(h: &ScaledHamiltonian<T>, ancilla: usize, steps: usize, orientation: Orientation) -> Result<Circuit<T>> {
    check_ancilla(h, ancilla)?;
    let n = ancilla + 1;
    let pass = palindromic_sequence(&h.base, h.t, steps)?;
    let mut seq = pass.clone();
    seq.extend(pass);
    let seq = merge(seq);
    let two = T::lit(2.0);
    // ancilla 1 gets exp(-i w P) for Plus: gadget(P, 2w)
    let sgn = match orientation {
        Orientation::Plus => T::one(),
        Orientation::Minus => -T::one(),
    };
    let mut c = Circuit::new(n);
    let s = sigma_eff(h);
    if s != T::zero() {
        c.push(Gate::Rz(ancilla, -sgn * two * s))?;
    }
    for (p, w) in seq {
        c.push(Gate::Gadget {
            string: PauliString::from_masks(n, p.x_mask(), p.z_mask()),
            angle: sgn * two * w,
            sign_control: None,
            enable_control: Some(ancilla),
        })?;
    }
    Ok(c)
}

/// Exact dense counterparts of the controlled blocks; the system must fill qubits `0..ancilla`.
pub struct ExactBlocks<T: Real> {
    fwd: Arc<CMat<T>>,
    bwd: Arc<CMat<T>>,
    fwd2: Arc<CMat<T>>,
    bwd2: Arc<CMat<T>>,
    id: Arc<CMat<T>>,
    ancilla: usize,
}

impl<T: Real> ExactBlocks<T> {
    pub fn new(h: &ScaledHamiltonian<T>, ancilla: usize) -> Result<Self> {
        check_ancilla(h, ancilla)?;
        if ancilla != h.n_qubits() {
            return Err(QetuError::InvalidCircuit("exact backend needs the ancilla directly above the system".into()));
        }
        let e = oracle::eigh(&h.base.cast::<f64>())?;
        let (t, s) = (h.t.as_f64(), h.sigma.as_f64());
        let conv = |m: &oracle::DenseOperator| Arc::new(CMat::from_nalgebra(m).map(from_c64::<T>));
        let f = e.function_matrix(|x| num_complex::Complex64::from_polar(1.0, x * t + s));
        let f2 = e.function_matrix(|x| num_complex::Complex64::from_polar(1.0, 2.0 * (x * t + s)));
        let dim = 1usize << ancilla;
        Ok(Self {
            fwd: conv(&f),
            bwd: conv(&f.adjoint()),
            fwd2: conv(&f2),
            bwd2: conv(&f2.adjoint()),
            id: Arc::new(CMat::identity(dim)),
            ancilla,
        })
    }

    pub fn fwd_rev(&self, o: Orientation) -> Gate<T> {
        let (a, b) = match o {
            Orientation::Plus => (&self.fwd, &self.bwd),
            Orientation::Minus => (&self.bwd, &self.fwd),
        };
        Gate::ControlledDense { control: self.ancilla, on_zero: a.clone(), on_one: b.clone() }
    }

    pub fn single(&self, o: Orientation) -> Gate<T> {
        let b = match o {
            Orientation::Plus => &self.bwd2,
            Orientation::Minus => &self.fwd2,
        };
        Gate::ControlledDense { control: self.ancilla, on_zero: self.id.clone(), on_one: b.clone() }
    }
}
