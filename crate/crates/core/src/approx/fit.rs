//! Bounded least-squares fit of an even cosine series `sum_k c_k cos(2 k x)`.

use serde::{Deserialize, Serialize};

use crate::error::{QetuError, Result};
use crate::linalg::cholesky_solve;
use crate::scalar::Real;

use super::target::TargetFunction;

/// Targets are multiplied by this factor before fitting.
pub const HEADROOM: f64 = 0.999;
/// Hard ceiling on `|P|` over the whole period.
pub const BOUND: f64 = 0.9995;
/// Points of the verification grid over the domain.
pub const VERIFY_POINTS: usize = 1000;

const MARGIN_WEIGHT: f64 = 1e-3;
const PIN_WEIGHT: f64 = 10.0;
const MAX_ACTIVE_ROUNDS: usize = 60;

/// `P(x) = sum_k coeffs[k] cos(2 k x)`, i.e. `sum_k c_k T_{2k}(cos x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevExpansion<T: Real = f64> {
    pub coeffs: Vec<T>,
    pub degree: usize,
    /// Factor applied to the target before fitting.
    pub scale: T,
    /// Largest `|P - scale f|` on the verification grid over the domain.
    pub max_deviation: T,
    /// Largest `|P|` over `[0, pi/2]`.
    pub sup_norm: T,
}

impl<T: Real> ChebyshevExpansion<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        let degree = 2 * (coeffs.len().max(1) - 1);
        let sup = sup_abs(&coeffs, 4096);
        Self { coeffs, degree, scale: T::one(), max_deviation: T::zero(), sup_norm: sup }
    }

    pub fn eval(&self, x: T) -> T {
        eval_cos_series(&self.coeffs, x)
    }
}

/// Clenshaw evaluation of `sum_k c_k cos(2 k x)`.
pub fn eval_cos_series<T: Real>(c: &[T], x: T) -> T {
    let y = (x + x).cos();
    let two_y = y + y;
    let (mut b1, mut b2) = (T::zero(), T::zero());
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + two_y * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(T::zero()) + y * b1 - b2
}

fn sup_abs<T: Real>(c: &[T], points: usize) -> T {
    let h = T::FRAC_PI_2() / T::lit(points as f64);
    (0..=points).map(|j| eval_cos_series(c, h * T::lit(j as f64)).abs()).fold(T::zero(), T::max)
}

struct Rows {
    basis: Vec<Vec<f64>>,
    target: Vec<f64>,
    weight: Vec<f64>,
}

fn basis_row(x: f64, k1: usize) -> Vec<f64> {
    (0..k1).map(|k| (2.0 * k as f64 * x).cos()).collect()
}

fn solve_normal(rows: &Rows, k1: usize) -> Result<Vec<f64>> {
    let mut g = vec![0.0; k1 * k1];
    let mut rhs = vec![0.0; k1];
    for ((a, y), w) in rows.basis.iter().zip(&rows.target).zip(&rows.weight) {
        for i in 0..k1 {
            let wa = w * a[i];
            rhs[i] += wa * y;
            for j in 0..=i {
                g[i * k1 + j] += wa * a[j];
            }
        }
    }
    for i in 0..k1 {
        for j in 0..i {
            g[j * k1 + i] = g[i * k1 + j];
        }
    }
    cholesky_solve(&mut g, &rhs, k1)
}

/// Least-squares fit of `HEADROOM * f` with `|P| <= BOUND` enforced by an active set, the
/// protected point (if any) pinned to `HEADROOM * f`, and the margins `[0, eta)`,
/// `(pi/2 - eta, pi/2]` weakly tied to the nearest endpoint value. Computed in f64.
pub fn fit_chebyshev_even<T: Real>(f: &TargetFunction<T>, degree: usize) -> Result<ChebyshevExpansion<T>> {
    if degree < 2 || degree % 2 != 0 {
        return Err(QetuError::InvalidInput(format!("degree {degree} must be even and at least 2")));
    }
    let k1 = degree / 2 + 1;
    let (lo, hi) = f.domain();
    let (lo, hi) = (lo.as_f64(), hi.as_f64());
    let fv = |x: f64| HEADROOM * f.eval(T::lit(x)).as_f64();
    let m = (8 * k1).max(2000);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut rows = Rows { basis: Vec::with_capacity(m + 8), target: Vec::new(), weight: Vec::new() };
    for j in 0..m {
        let x = (j as f64 + 0.5) * half_pi / m as f64;
        let (y, w) = if x < lo {
            (fv(lo), MARGIN_WEIGHT)
        } else if x > hi {
            (fv(hi), MARGIN_WEIGHT)
        } else {
            (fv(x), 1.0)
        };
        rows.basis.push(basis_row(x, k1));
        rows.target.push(y);
        rows.weight.push(w);
    }
    let pin = PIN_WEIGHT * m as f64;
    if let Some(p) = f.protected_point() {
        let p = p.as_f64();
        rows.basis.push(basis_row(p, k1));
        rows.target.push(fv(p));
        rows.weight.push(pin);
    }
    let check = 4 * m;
    let check_x: Vec<f64> = (0..=check).map(|j| j as f64 * half_pi / check as f64).collect();
    let mut coeffs = solve_normal(&rows, k1)?;
    for _ in 0..MAX_ACTIVE_ROUNDS {
        let vals: Vec<f64> = check_x.iter().map(|&x| eval_cos_series(&coeffs, x)).collect();
        let mut added = false;
        for j in 0..vals.len() {
            let v = vals[j].abs();
            let left = if j > 0 { vals[j - 1].abs() } else { 0.0 };
            let right = if j + 1 < vals.len() { vals[j + 1].abs() } else { 0.0 };
            if v > BOUND && v >= left && v >= right {
                rows.basis.push(basis_row(check_x[j], k1));
                rows.target.push(HEADROOM * vals[j].signum());
                rows.weight.push(pin);
                added = true;
            }
        }
        if !added {
            break;
        }
        coeffs = solve_normal(&rows, k1)?;
    }
    let sup = check_x.iter().map(|&x| eval_cos_series(&coeffs, x).abs()).fold(0.0, f64::max);
    if sup > BOUND {
        let s = BOUND / sup;
        coeffs.iter_mut().for_each(|c| *c *= s);
    }
    let max_dev = (0..VERIFY_POINTS)
        .map(|j| {
            let x = lo + (hi - lo) * j as f64 / (VERIFY_POINTS - 1) as f64;
            (eval_cos_series(&coeffs, x) - fv(x)).abs()
        })
        .fold(0.0, f64::max);
    let sup = check_x.iter().map(|&x| eval_cos_series(&coeffs, x).abs()).fold(0.0, f64::max);
    Ok(ChebyshevExpansion {
        coeffs: coeffs.into_iter().map(T::lit).collect(),
        degree,
        scale: T::lit(HEADROOM),
        max_deviation: T::lit(max_dev),
        sup_norm: T::lit(sup),
    })
}
