//! Vectorized Lindbladian and Hermitian splitting.

use super::{PauliSum, Register};
use crate::error::{QetuError, Result};
use crate::scalar::{c, c_re, Real};

/// System Hamiltonian plus jump operators on `n` qubits.
#[derive(Clone, Debug)]
pub struct LindbladModel<T: Real = f64> {
    pub h_sys: PauliSum<T>,
    pub jump_ops: Vec<PauliSum<T>>,
}

impl<T: Real> LindbladModel<T> {
    pub fn new(h_sys: PauliSum<T>, jump_ops: Vec<PauliSum<T>>) -> Result<Self> {
        if !h_sys.is_hermitian() {
            return Err(QetuError::InvalidModel("system Hamiltonian is not Hermitian".into()));
        }
        if let Some(l) = jump_ops.iter().find(|l| l.n_qubits() != h_sys.n_qubits()) {
            return Err(QetuError::InvalidModel(format!(
                "jump operator on {} qubits, system has {}",
                l.n_qubits(),
                h_sys.n_qubits()
            )));
        }
        Ok(Self { h_sys, jump_ops })
    }

    pub fn n_qubits(&self) -> usize {
        self.h_sys.n_qubits()
    }

    /// Register size of the vectorized density operator.
    pub fn vectorized_qubits(&self) -> usize {
        2 * self.n_qubits()
    }
}

/// Column-stacked Lindbladian on `2n` qubits: the row index of `rho` lives on register B
/// (low qubits) and the column index on register A (high qubits).
pub fn build_lindbladian<T: Real>(model: &LindbladModel<T>) -> Result<PauliSum<T>> {
    let n = model.n_qubits();
    if let Some(l) = model.jump_ops.iter().find(|l| l.n_qubits() != n) {
        return Err(QetuError::InvalidModel(format!("jump operator on {} qubits, system has {n}", l.n_qubits())));
    }
    let total = 2 * n;
    let h = &model.h_sys;
    let i_unit = c(T::zero(), T::one());
    let mut out = h.embed(Register::B, total)?.scale(-i_unit);
    out = &out + &h.transpose().embed(Register::A, total)?.scale(i_unit);
    let half = c_re(T::lit(-0.5));
    for l in &model.jump_ops {
        out = &out + &l.conjugate().tensor(l)?;
        let ldl = &l.adjoint() * l;
        out = &out + &ldl.embed(Register::B, total)?.scale(half);
        let ltl = &l.transpose() * &l.conjugate();
        out = &out + &ltl.embed(Register::A, total)?.scale(half);
    }
    Ok(out)
}

/// Splits `l = i h1 + h2` with `h1 = (l - l^dag)/2i` and `h2 = (l + l^dag)/2`.
pub fn hermitian_split<T: Real>(l: &PauliSum<T>) -> (PauliSum<T>, PauliSum<T>) {
    let n = l.n_qubits();
    let mut h1 = PauliSum::zero(n);
    let mut h2 = PauliSum::zero(n);
    for (p, a) in l.terms() {
        h1.add_term(*p, c_re(a.im));
        h2.add_term(*p, c_re(a.re));
    }
    (h1, h2)
}
