//! Single-qubit QSP response and the symmetric phase-factor solver.
//!
//! The response is `Re <0| R(phi_0) S_1 R(phi_1) S_2 ... S_d R(phi_d) |0>` with
//! `R(phi) = exp(i phi X)` and `S_k = exp(+i x Z)` for odd `k`, `exp(-i x Z)` for even `k`.

use serde::{Deserialize, Serialize};

use crate::error::{QetuError, Result};
use crate::linalg::cholesky_solve;
use crate::scalar::{c, Real, C};

use super::fit::ChebyshevExpansion;

/// Symmetric phases `phi_0..phi_d` with `phi_k = phi_{d-k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFactorSet<T: Real = f64> {
    pub phases: Vec<T>,
    pub degree: usize,
    /// Max residual on the solver's node set.
    pub residual: T,
}

impl<T: Real> PhaseFactorSet<T> {
    /// Expands the free half `psi_0..psi_{d/2}` into the full symmetric set.
    pub fn from_reduced(reduced: &[T], degree: usize) -> Result<Self> {
        if degree % 2 != 0 || reduced.len() != degree / 2 + 1 {
            return Err(QetuError::InvalidInput(format!(
                "{} free phases do not describe an even degree {degree}",
                reduced.len()
            )));
        }
        Ok(Self { phases: expand(reduced, degree), degree, residual: T::zero() })
    }

    /// Phases read from a file or other source, checked for symmetry.
    pub fn from_phases(phases: Vec<T>) -> Result<Self> {
        if phases.is_empty() {
            return Err(QetuError::InvalidInput("no phases".into()));
        }
        let degree = phases.len() - 1;
        let tol = T::lit(1e-12);
        if (0..=degree).any(|k| (phases[k] - phases[degree - k]).abs() > tol) {
            return Err(QetuError::InvalidInput("phase factors are not symmetric".into()));
        }
        Ok(Self { phases, degree, residual: T::zero() })
    }

    /// `d = 0` with the identity response (P = 1).
    pub fn trivial() -> Self {
        Self { phases: vec![T::zero()], degree: 0, residual: T::zero() }
    }

    pub fn is_symmetric(&self) -> bool {
        let d = self.degree;
        (0..=d).all(|k| self.phases[k] == self.phases[d - k])
    }

    pub fn reduced(&self) -> Vec<T> {
        self.phases[..=self.degree / 2].to_vec()
    }

    pub fn eval(&self, x: T) -> T {
        qsp_eval(&self.phases, x)
    }
}

fn expand<T: Real>(reduced: &[T], degree: usize) -> Vec<T> {
    (0..=degree).map(|k| reduced[k.min(degree - k)]).collect()
}

type M2<T> = [[C<T>; 2]; 2];

#[inline]
fn mul2<T: Real>(a: &M2<T>, b: &M2<T>) -> M2<T> {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

#[inline]
fn rot_x<T: Real>(phi: T) -> M2<T> {
    let (s, co) = phi.sin_cos();
    [[c(co, T::zero()), c(T::zero(), s)], [c(T::zero(), s), c(co, T::zero())]]
}

#[inline]
fn sig<T: Real>(x: T, k: usize) -> M2<T> {
    let (s, co) = x.sin_cos();
    let s = if k % 2 == 1 { s } else { -s };
    [[c(co, s), c(T::zero(), T::zero())], [c(T::zero(), T::zero()), c(co, -s)]]
}

/// Real part of the (0,0) entry of the alternating product; `phases` may have any length.
pub fn qsp_eval<T: Real>(phases: &[T], x: T) -> T {
    if phases.is_empty() {
        return T::one();
    }
    let mut u = rot_x(phases[0]);
    for (k, &phi) in phases.iter().enumerate().skip(1) {
        u = mul2(&u, &sig(x, k));
        u = mul2(&u, &rot_x(phi));
    }
    u[0][0].re
}

/// Response and its derivatives with respect to every full phase at one point.
fn eval_with_grad<T: Real>(phases: &[T], x: T, grad: &mut [T]) -> T {
    let d = phases.len() - 1;
    // row vectors u_k = e0^T R_0 S_1 ... S_k (before R_k)
    let zero = c(T::zero(), T::zero());
    let one = c(T::one(), T::zero());
    let mut us: Vec<[C<T>; 2]> = Vec::with_capacity(d + 1);
    let mut u = [one, zero];
    us.push(u);
    for k in 1..=d {
        let r = rot_x(phases[k - 1]);
        u = [u[0] * r[0][0] + u[1] * r[1][0], u[0] * r[0][1] + u[1] * r[1][1]];
        let s = sig(x, k);
        u = [u[0] * s[0][0], u[1] * s[1][1]];
        us.push(u);
    }
    // column vectors v_k = R_k S_{k+1} ... R_d e0, built from the right
    let mut v = [one, zero];
    let mut value = T::zero();
    let ix = c(T::zero(), T::one());
    for k in (0..=d).rev() {
        let r = rot_x(phases[k]);
        let rv = [r[0][0] * v[0] + r[0][1] * v[1], r[1][0] * v[0] + r[1][1] * v[1]];
        let uk = us[k];
        // d/dphi_k: u_k (i X) R_k Q_k e0
        grad[k] = (ix * (uk[0] * rv[1] + uk[1] * rv[0])).re;
        if k == 0 {
            value = (uk[0] * rv[0] + uk[1] * rv[1]).re;
        }
        v = rv;
        if k > 0 {
            let s = sig(x, k);
            v = [s[0][0] * v[0], s[1][1] * v[1]];
        }
    }
    value
}

/// Solver nodes: positive Chebyshev-Gauss points `(2j - 1) pi / (4 count)` on `(0, pi/2)`.
///
/// The expansion is defined on the whole interval (margins included), so matching it here
/// pins the response everywhere; nodes squeezed into `[eta, pi/2 - eta]` leave the ends
/// badly conditioned at high degree.
pub fn solver_nodes<T: Real>(count: usize) -> Vec<T> {
    (1..=count).map(|j| T::lit((2 * j - 1) as f64) * T::PI() / T::lit(4.0 * count as f64)).collect()
}

/// Residuals `g(x_j) - P(x_j)` and the Jacobian over the free phases (row-major, `m x m`).
fn residual_and_jacobian<T: Real>(reduced: &[T], degree: usize, nodes: &[T], targets: &[T]) -> (Vec<T>, Vec<T>) {
    let m = reduced.len();
    let phases = expand(reduced, degree);
    let mut r = Vec::with_capacity(nodes.len());
    let mut jac = vec![T::zero(); nodes.len() * m];
    let mut g = vec![T::zero(); degree + 1];
    for (i, (&x, &y)) in nodes.iter().zip(targets).enumerate() {
        let val = eval_with_grad(&phases, x, &mut g);
        r.push(val - y);
        for (k, gk) in g.iter().enumerate() {
            jac[i * m + k.min(degree - k)] += *gk;
        }
    }
    (r, jac)
}

/// Objective `1/2 sum_j r_j^2` over the nodes and its gradient with respect to the free phases.
pub fn objective_and_gradient<T: Real>(reduced: &[T], degree: usize, nodes: &[T], targets: &[T]) -> (T, Vec<T>) {
    let m = reduced.len();
    let (r, jac) = residual_and_jacobian(reduced, degree, nodes, targets);
    let f = r.iter().map(|v| *v * *v).sum::<T>() * T::lit(0.5);
    let grad = (0..m).map(|k| r.iter().enumerate().map(|(i, ri)| *ri * jac[i * m + k]).sum()).collect();
    (f, grad)
}

/// Finds symmetric phases whose response matches `cheb` on `d/2 + 1` solver nodes.
///
/// Levenberg-Marquardt on the square residual system, started from `(0, -pi/2, ..., -pi/2, 0)` (zero response).
/// Fails with the best residual seen after `max_iter` Jacobian evaluations.
pub fn solve_phases<T: Real>(cheb: &ChebyshevExpansion<T>, tol: T, max_iter: usize) -> Result<PhaseFactorSet<T>> {
    if !(tol > T::zero()) {
        return Err(QetuError::InvalidInput("tolerance must be positive".into()));
    }
    let degree = cheb.degree;
    if degree % 2 != 0 || cheb.coeffs.len() != degree / 2 + 1 {
        return Err(QetuError::InvalidInput("expansion degree and coefficient count disagree".into()));
    }
    let m = degree / 2 + 1;
    let nodes = solver_nodes(m);
    let targets: Vec<T> = nodes.iter().map(|&x| cheb.eval(x)).collect();
    // maps onto the usual zero-response start of the Z-processing convention
    let mut psi = vec![-T::FRAC_PI_2(); m];
    psi[0] = T::zero();
    if degree == 0 {
        // single phase: cos(phi_0) is the constant response
        let c0 = cheb.coeffs[0].max(-T::one()).min(T::one());
        psi[0] = c0.acos();
        let res = (qsp_eval(&psi, T::zero()) - cheb.coeffs[0]).abs();
        return Ok(PhaseFactorSet { phases: psi, degree, residual: res });
    }
    let max_abs = |r: &[T]| r.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let (mut r, mut jac) = residual_and_jacobian(&psi, degree, &nodes, &targets);
    let mut cost: T = r.iter().map(|v| *v * *v).sum();
    let mut best = max_abs(&r);
    let mut mu = T::lit(1e-6);
    for _ in 0..max_iter {
        if best <= tol {
            break;
        }
        // normal equations J^T J + mu diag, rhs -J^T r
        let mut jtj = vec![T::zero(); m * m];
        let mut jtr = vec![T::zero(); m];
        for i in 0..m {
            let row = &jac[i * m..(i + 1) * m];
            for a in 0..m {
                jtr[a] -= row[a] * r[i];
                for b in 0..=a {
                    jtj[a * m + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                jtj[b * m + a] = jtj[a * m + b];
            }
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut sys = jtj.clone();
            for a in 0..m {
                sys[a * m + a] += mu * (T::one() + jtj[a * m + a]);
            }
            let step = match cholesky_solve(&mut sys, &jtr, m) {
                Ok(s) => s,
                Err(_) => {
                    mu *= T::lit(10.0);
                    continue;
                }
            };
            let trial: Vec<T> = psi.iter().zip(&step).map(|(a, b)| *a + *b).collect();
            let (tr, tj) = residual_and_jacobian(&trial, degree, &nodes, &targets);
            let tcost: T = tr.iter().map(|v| *v * *v).sum();
            if tcost.is_finite() && tcost < cost {
                psi = trial;
                r = tr;
                jac = tj;
                cost = tcost;
                mu = (mu * T::lit(0.2)).max(T::lit(1e-15));
                accepted = true;
                break;
            }
            mu *= T::lit(8.0);
        }
        best = best.min(max_abs(&r));
        if !accepted {
            break;
        }
    }
    let residual = max_abs(&r);
    if residual > tol {
        return Err(QetuError::Convergence { best_residual: best.as_f64(), iterations: max_iter });
    }
    Ok(PhaseFactorSet { phases: expand(&psi, degree), degree, residual })
}

/// Max `|qsp_eval - P|` on `points` equispaced samples of `[eta, pi/2 - eta]`.
pub fn verify_phases<T: Real>(phases: &PhaseFactorSet<T>, cheb: &ChebyshevExpansion<T>, eta: T, points: usize) -> T {
    let (lo, hi) = (eta, T::FRAC_PI_2() - eta);
    (0..points)
        .map(|j| {
            let x = lo + (hi - lo) * T::lit(j as f64 / (points - 1) as f64);
            (phases.eval(x) - cheb.eval(x)).abs()
        })
        .fold(T::zero(), T::max)
}
