#![allow(dead_code)]

use num_complex::Complex64;
use qetu_core::approx::{ite_target, synthesize, Direction};
use qetu_core::linalg::CMat;
use qetu_core::pauli::build_tfim;
use qetu_core::qetu::QetuPlan;
use qetu_core::sim::{trotter_circuit_order, TrotterOrder};
use qetu_core::spectrum::{bounds_exact, make_scaled};
use qetu_core::{Backend, PauliSum, StateVector, Variant};

/// Small ITE plan on a 3-site transverse-field chain.
pub fn small_plan(degree: usize, tau: f64, steps: usize, variant: Variant, backend: Backend) -> QetuPlan<f64> {
    let h = build_tfim(3, 1.0, 0.7).unwrap();
    let sc = make_scaled(&h, bounds_exact(&h).unwrap(), 0.05).unwrap();
    let f = ite_target(&sc, tau, Direction::Forward).unwrap();
    let (_, ph) = synthesize(&f, degree, 1e-10, 500).unwrap();
    QetuPlan::new(sc, ph, steps).with_variant(variant).with_backend(backend)
}

/// Deterministic non-trivial state.
pub fn test_state(n: usize, seed: u64) -> StateVector<f64> {
    let dim = 1usize << n;
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let amps = (0..dim)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (x >> 33) as f64 / (1u64 << 31) as f64 - 0.5;
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = (x >> 33) as f64 / (1u64 << 31) as f64 - 0.5;
            Complex64::new(a, b)
        })
        .collect();
    let mut s = StateVector::from_amplitudes(n, amps).unwrap();
    s.normalize().unwrap();
    s
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Top-left `dim x dim` block of a dense matrix.
pub fn top_left(m: &CMat<f64>, dim: usize) -> CMat<f64> {
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out.set(i, j, m.get(i, j));
        }
    }
    out
}

pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

/// Max entry distance after removing the global phase.
pub fn phase_free_diff(a: &CMat<f64>, b: &CMat<f64>) -> f64 {
    let mut k = 0;
    for i in 0..a.data.len() {
        if b.data[i].norm() > b.data[k].norm() {
            k = i;
        }
    }
    let ph = a.data[k] / b.data[k];
    let ph = ph / ph.norm();
    a.data.iter().zip(&b.data).map(|(x, y)| (x - ph * y).norm()).fold(0.0, f64::max)
}

/// Error of the first- and second-order product formulas against the exact propagator.
pub fn trotter_errors(order: TrotterOrder) -> (Vec<f64>, Vec<f64>) {
    let h = PauliSum::<f64>::from_real_terms(2, &[("XI", 0.5), ("ZZ", 0.7), ("IY", 0.4), ("ZX", 0.3)]).unwrap();
    let exact = qetu_core::oracle::unitary_evolution(&h, 1.0).unwrap();
    let (mut dts, mut errs) = (vec![], vec![]);
    for steps in [8, 16, 32, 64] {
        let c = trotter_circuit_order(&h, 1.0, steps, order).unwrap().to_dense().unwrap();
        dts.push(1.0 / steps as f64);
        errs.push(phase_free_diff(&c, &exact));
    }
    (dts, errs)
}

