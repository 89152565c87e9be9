//! Model Hamiltonians.

use super::{Pauli, PauliString, PauliSum};
use crate::error::{QetuError, Result};
use crate::scalar::{c, c_re, Real};

use super::lindblad::LindbladModel;

/// Jordan-Wigner annihilation operator for spin-orbital `p` on `n` qubits:
/// `Z_0 ... Z_{p-1} (X_p + iY_p)/2`, with |1> meaning occupied.
pub fn jw_annihilation<T: Real>(n: usize, p: usize) -> PauliSum<T> {
    let mut zs = PauliString::identity(n);
    for q in 0..p {
        zs.set(q, Pauli::Z);
    }
    let mut xs = zs;
    xs.set(p, Pauli::X);
    let mut ys = zs;
    ys.set(p, Pauli::Y);
    let half = T::lit(0.5);
    let mut out = PauliSum::zero(n);
    out.add_term(xs, c_re(half));
    out.add_term(ys, c(T::zero(), half));
    out
}

fn number<T: Real>(n: usize, p: usize) -> PauliSum<T> {
    let mut out = PauliSum::zero(n);
    let half = T::lit(0.5);
    out.add_term(PauliString::identity(n), c_re(half));
    out.add_term(PauliString::single(n, p, Pauli::Z), c_re(-half));
    out
}

/// Open-chain Fermi-Hubbard model on `2 * sites` qubits.
///
/// Spin-orbital `(i, up)` is qubit `i`, `(i, down)` is qubit `sites + i`.
pub fn build_hubbard<T: Real>(sites: usize, t_hop: T, u: T) -> Result<PauliSum<T>> {
    if sites < 2 {
        return Err(QetuError::InvalidModel(format!("Hubbard chain needs at least 2 sites, got {sites}")));
    }
    let n = 2 * sites;
    if n > super::MAX_QUBITS {
        return Err(QetuError::InvalidModel("chain too long".into()));
    }
    let mut h = PauliSum::zero(n);
    for spin in 0..2 {
        for i in 0..sites - 1 {
            let p = spin * sites + i;
            let q = p + 1;
            let ap = jw_annihilation::<T>(n, p);
            let aq = jw_annihilation::<T>(n, q);
            let hop = &(&ap.adjoint() * &aq) + &(&aq.adjoint() * &ap);
            h = &h + &hop.scale_real(-t_hop);
        }
    }
    for i in 0..sites {
        let nn = &number::<T>(n, i) * &number::<T>(n, sites + i);
        h = &h + &nn.scale_real(u);
    }
    h.simplify(T::lit(super::PRUNE_TOL));
    Ok(h)
}

/// Total particle-number operator for a Hubbard register of `sites` sites.
pub fn hubbard_number_op<T: Real>(sites: usize) -> PauliSum<T> {
    let n = 2 * sites;
    let mut out = PauliSum::zero(n);
    for p in 0..n {
        out = &out + &number::<T>(n, p);
    }
    out
}

/// Open-chain transverse-field Ising model `-J sum Z_i Z_{i+1} + g sum X_i`.
pub fn build_tfim<T: Real>(sites: usize, j: T, g: T) -> Result<PauliSum<T>> {
    if sites < 2 {
        return Err(QetuError::InvalidModel(format!("TFIM chain needs at least 2 sites, got {sites}")));
    }
    if sites > super::MAX_QUBITS {
        return Err(QetuError::InvalidModel("chain too long".into()));
    }
    let mut h = PauliSum::zero(sites);
    for i in 0..sites - 1 {
        let mut p = PauliString::identity(sites);
        p.set(i, Pauli::Z);
        p.set(i + 1, Pauli::Z);
        h.add_term(p, c_re(-j));
    }
    for i in 0..sites {
        h.add_term(PauliString::single(sites, i, Pauli::X), c_re(g));
    }
    Ok(h)
}

/// Driven two-level system `H = -delta/2 Z - omega/2 X` with jump operator `sqrt(gamma)(X - iY)`.
///
/// The jump operator maps |0> to 2|1>, so |0> is the excited state and its
/// population decays as `exp(-4 gamma t)`.
pub fn two_level_damping<T: Real>(delta: T, omega: T, gamma: T) -> Result<LindbladModel<T>> {
    if gamma < T::zero() {
        return Err(QetuError::InvalidModel("damping rate must be non-negative".into()));
    }
    let half = T::lit(0.5);
    let mut h = PauliSum::zero(1);
    h.add_term(PauliString::single(1, 0, Pauli::Z), c_re(-delta * half));
    h.add_term(PauliString::single(1, 0, Pauli::X), c_re(-omega * half));
    let s = gamma.sqrt();
    let mut l = PauliSum::zero(1);
    l.add_term(PauliString::single(1, 0, Pauli::X), c_re(s));
    l.add_term(PauliString::single(1, 0, Pauli::Y), c(T::zero(), -s));
    LindbladModel::new(h, vec![l])
}
