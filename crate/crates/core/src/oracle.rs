//! Dense-matrix ground truth (f64 only): diagonalization, exact ITE, Gibbs states,
//! Lindblad ODE integration and exact QET-U block extraction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QetuError, Result};
use crate::linalg::CMat;
use crate::pauli::{LindbladModel, PauliSum};
use crate::qetu::{QetuPlan, Variant};
use crate::sim::StateVector;

/// Largest register the oracle will densify.
pub const MAX_DENSE_QUBITS: usize = 14;

pub type DenseOperator = DMatrix<Complex64>;

/// Eigendecomposition with eigenvalues sorted ascending; column `i` of `vectors` is `|Phi_i>`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DenseOperator,
}

pub fn dense(h: &PauliSum<f64>) -> Result<DenseOperator> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(QetuError::Resource(format!("{} qubits exceed the dense limit of {MAX_DENSE_QUBITS}", h.n_qubits())));
    }
    Ok(h.to_dense().to_nalgebra())
}

pub fn eigh_dense(m: &DenseOperator) -> Eigen {
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = DenseOperator::from_fn(m.nrows(), m.ncols(), |r, col| se.eigenvectors[(r, idx[col])]);
    Eigen { values, vectors }
}

pub fn eigh(h: &PauliSum<f64>) -> Result<Eigen> {
    if !h.is_hermitian() {
        return Err(QetuError::InvalidInput("operator is not Hermitian".into()));
    }
    Ok(eigh_dense(&dense(h)?))
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Components `a_i = <Phi_i|v>`.
    pub fn components(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim())
            .map(|i| self.vectors.column(i).iter().zip(v).map(|(p, x)| p.conj() * x).sum())
            .collect()
    }

    /// `f(H) v`.
    pub fn apply_fn(&self, v: &[Complex64], f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        let a = self.components(v);
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (i, ai) in a.iter().enumerate() {
            let w = ai * f(self.values[i]);
            if w.norm() == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.vectors.column(i).iter()) {
                *o += w * p;
            }
        }
        out
    }

    /// Dense `f(H)`.
    pub fn function_matrix(&self, f: impl Fn(f64) -> Complex64) -> DenseOperator {
        let n = self.dim();
        let d = DenseOperator::from_fn(n, n, |r, col| if r == col { f(self.values[r]) } else { Complex64::new(0.0, 0.0) });
        &self.vectors * d * self.vectors.adjoint()
    }

    /// Lowest eigenvalue whose eigenvector overlaps `v` by more than `tol` in modulus.
    pub fn lowest_reachable(&self, v: &[Complex64], tol: f64) -> Option<(usize, f64)> {
        self.components(v).iter().enumerate().find(|(_, a)| a.norm() > tol).map(|(i, _)| (i, self.values[i]))
    }
}

fn to_vec(s: &StateVector<f64>) -> Vec<Complex64> {
    s.amplitudes().to_vec()
}

/// `e^{-H tau} psi0` normalized, with `<psi0|e^{-2 H tau}|psi0>`.
pub fn exact_ite(h: &PauliSum<f64>, psi0: &StateVector<f64>, tau: f64) -> Result<(StateVector<f64>, f64)> {
    let e = eigh(h)?;
    exact_ite_with(&e, psi0, tau, 0.0)
}

/// As [`exact_ite`] on a precomputed decomposition, with energies measured from `e_ref`.
pub fn exact_ite_with(e: &Eigen, psi0: &StateVector<f64>, tau: f64, e_ref: f64) -> Result<(StateVector<f64>, f64)> {
    if psi0.amplitudes().len() != e.dim() {
        return Err(QetuError::InvalidInput("state and operator dimensions differ".into()));
    }
    let v = e.apply_fn(&to_vec(psi0), |x| Complex64::new((-(x - e_ref) * tau).exp(), 0.0));
    let mut s = StateVector::from_amplitudes(psi0.n_qubits(), v)?;
    let n2 = s.normalize()?;
    Ok((s, n2))
}

/// Energy `<psi|H|psi>` using the eigendecomposition.
pub fn energy(e: &Eigen, psi: &StateVector<f64>) -> f64 {
    e.components(psi.amplitudes()).iter().zip(&e.values).map(|(a, x)| a.norm_sqr() * x).sum()
}

/// Success probability `sum_i |a_i|^2 exp(-2 tau (E_i - e_norm))` of the exact normalized
/// transform, for overlaps `weights = |a_i|^2` on the eigenbasis of `e`.
pub fn transform_success(e: &Eigen, weights: &[f64], tau: f64, e_norm: f64) -> f64 {
    weights.iter().zip(&e.values).map(|(w, x)| w * (-2.0 * tau * (x - e_norm)).exp()).sum()
}

/// Smallest `tau` at which exact imaginary-time evolution of `psi0` gets within `accuracy` of the
/// lowest energy it can reach, with the success probability of the transform normalized to
/// `e_norm` at that `tau`. `None` if `psi0` already sits in an eigenspace or `tau` would exceed 1e6.
pub fn success_at_accuracy(e: &Eigen, psi0: &StateVector<f64>, e_norm: f64, accuracy: f64) -> Option<(f64, f64)> {
    let w: Vec<f64> = e.components(psi0.amplitudes()).iter().map(|a| a.norm_sqr()).collect();
    let (_, e_low) = e.lowest_reachable(psi0.amplitudes(), 1e-9)?;
    // energy excess with weights relative to the lowest reachable level (no underflow)
    let excess = |tau: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for (wi, x) in w.iter().zip(&e.values) {
            let f = wi * (-2.0 * tau * (x - e_low)).exp();
            num += f * (x - e_low);
            den += f;
        }
        num / den
    };
    if excess(0.0) <= accuracy {
        return Some((0.0, transform_success(e, &w, 0.0, e_norm)));
    }
    let mut hi = 1.0;
    while excess(hi) > accuracy {
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > accuracy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((hi, transform_success(e, &w, hi, e_norm)))
}

/// Exact Gibbs quantities.
#[derive(Clone, Debug)]
pub struct GibbsExact {
    pub rho: CMat<f64>,
    pub z: f64,
    pub magnetization: f64,
    pub abs_magnetization: f64,
}

pub fn exact_gibbs(h: &PauliSum<f64>, beta: f64) -> Result<GibbsExact> {
    let e = eigh(h)?;
    let e0 = e.values[0];
    // shift by e0 for stability, undo in z
    let m = e.function_matrix(|x| Complex64::new((-beta * (x - e0)).exp(), 0.0));
    let zs: f64 = e.values.iter().map(|x| (-beta * (x - e0)).exp()).sum();
    let rho = CMat::from_nalgebra(&(m / Complex64::new(zs, 0.0)));
    let n = h.n_qubits();
    Ok(GibbsExact {
        magnetization: crate::apps::magnetization(&rho, n),
        abs_magnetization: crate::apps::abs_magnetization(&rho, n),
        rho,
        z: zs * (-beta * e0).exp(),
    })
}

/// Trace distance `||a - b||_1 / 2` of Hermitian matrices.
pub fn trace_distance(a: &CMat<f64>, b: &CMat<f64>) -> f64 {
    let d = a.sub(b).to_nalgebra();
    let d = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
    let ev = nalgebra::SymmetricEigen::new(d).eigenvalues;
    0.5 * ev.iter().map(|x| x.abs()).sum::<f64>()
}

/// Dense `exp(-i H time)`.
pub fn unitary_evolution(h: &PauliSum<f64>, time: f64) -> Result<CMat<f64>> {
    let e = eigh(h)?;
    Ok(CMat::from_nalgebra(&e.function_matrix(|x| Complex64::from_polar(1.0, -x * time))))
}

/// Diagonal of the density matrix after each step, as `(time, diag)` for steps `0..=n_steps`.
pub type PopulationSeries = Vec<(f64, Vec<f64>)>;

/// RK4 integration of the master equation from `rho0`, inner step `dt / 100`.
pub fn exact_lindblad_from(model: &LindbladModel<f64>, rho0: &CMat<f64>, dt: f64, n_steps: usize) -> Result<PopulationSeries> {
    let n = model.n_qubits();
    if n > 4 {
        return Err(QetuError::Resource("Lindblad oracle is limited to 4 system qubits".into()));
    }
    let h = dense(&model.h_sys)?;
    let ls: Vec<DenseOperator> = model.jump_ops.iter().map(dense).collect::<Result<_>>()?;
    let ldl: Vec<DenseOperator> = ls.iter().map(|l| l.adjoint() * l).collect();
    let minus_i = Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);
    let rhs = |r: &DenseOperator| -> DenseOperator {
        let mut out = (&h * r - r * &h) * minus_i;
        for (l, m) in ls.iter().zip(&ldl) {
            out += l * r * l.adjoint() - (m * r + r * m) * half;
        }
        out
    };
    let mut rho = rho0.to_nalgebra();
    let inner = 100usize;
    let hstep = dt / inner as f64;
    let diag = |r: &DenseOperator| (0..r.nrows()).map(|i| r[(i, i)].re).collect::<Vec<_>>();
    let mut out = vec![(0.0, diag(&rho))];
    let hs = Complex64::new(hstep, 0.0);
    for step in 1..=n_steps {
        for _ in 0..inner {
            let k1 = rhs(&rho);
            let k2 = rhs(&(&rho + &k1 * (hs * 0.5)));
            let k3 = rhs(&(&rho + &k2 * (hs * 0.5)));
            let k4 = rhs(&(&rho + &k3 * hs));
            rho += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * (hs / 6.0);
        }
        out.push((step as f64 * dt, diag(&rho)));
    }
    Ok(out)
}

/// [`exact_lindblad_from`] starting in basis state |0...0>.
pub fn exact_lindblad(model: &LindbladModel<f64>, dt: f64, n_steps: usize) -> Result<PopulationSeries> {
    let dim = 1usize << model.n_qubits();
    let mut rho0 = CMat::zeros(dim, dim);
    rho0.set(0, 0, Complex64::new(1.0, 0.0));
    exact_lindblad_from(model, &rho0, dt, n_steps)
}

/// Top-left (ancilla = 0) block of the QET-U unitary built with exact controlled evolution.
pub fn dense_qsp_block(plan: &QetuPlan<f64>) -> Result<CMat<f64>> {
    let sys = plan.scaled.base.n_qubits();
    if sys + 1 > MAX_DENSE_QUBITS {
        return Err(QetuError::Resource("register too large for the dense QET-U oracle".into()));
    }
    let e = eigh(&plan.scaled.base)?;
    let dim = 1usize << sys;
    let (t, sigma) = (plan.scaled.t, plan.scaled.sigma);
    let fwd = e.function_matrix(|x| Complex64::from_polar(1.0, x * t + sigma));
    let bwd = fwd.adjoint();
    let id = DenseOperator::identity(dim, dim);
    let block = |a: &DenseOperator, b: &DenseOperator| {
        let mut m = DenseOperator::zeros(2 * dim, 2 * dim);
        m.view_mut((0, 0), (dim, dim)).copy_from(a);
        m.view_mut((dim, dim), (dim, dim)).copy_from(b);
        m
    };
    let rx = |phi: f64| {
        // exp(i phi X) on the ancilla (the highest qubit)
        let (co, si) = (Complex64::new(phi.cos(), 0.0), Complex64::new(0.0, phi.sin()));
        let mut m = DenseOperator::zeros(2 * dim, 2 * dim);
        m.view_mut((0, 0), (dim, dim)).copy_from(&(&id * co));
        m.view_mut((dim, dim), (dim, dim)).copy_from(&(&id * co));
        m.view_mut((0, dim), (dim, dim)).copy_from(&(&id * si));
        m.view_mut((dim, 0), (dim, dim)).copy_from(&(&id * si));
        m
    };
    let (plus, minus) = match plan.variant {
        Variant::FwdRev => (block(&fwd, &bwd), block(&bwd, &fwd)),
        Variant::ControlFree => (block(&id, &(&bwd * &bwd)), block(&id, &(&fwd * &fwd))),
    };
    let phases = &plan.phases.phases;
    // operator order R_0 S_1 R_1 ... S_d R_d with S_k = plus for odd k
    let mut u = rx(phases[0]);
    for (k, phi) in phases.iter().enumerate().skip(1) {
        u = u * if k % 2 == 1 { &plus } else { &minus };
        u *= rx(*phi);
    }
    let top = u.view((0, 0), (dim, dim)).into_owned();
    Ok(CMat::from_nalgebra(&top))
}
