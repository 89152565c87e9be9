//! Invariants as property tests.

mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qetu_core::apps::{lindblad_propagate, LindbladOptions, QetuOptions, StepMethod};
use qetu_core::approx::{objective_and_gradient, qsp_eval, solver_nodes, ChebyshevExpansion};
use qetu_core::linalg::CMat;
use qetu_core::oracle::{dense_qsp_block, exact_lindblad};
use qetu_core::pauli::{build_lindbladian, hermitian_split, jw_annihilation, two_level_damping, LindbladModel};
use qetu_core::qetu::PreparedQetu;
use qetu_core::sim::{apply_circuit, trotter_circuit, TrotterOrder};
use qetu_core::spectrum::{bounds_exact, bounds_gershgorin, bounds_norm_sum};
use qetu_core::{Backend, Circuit, Gate, PauliString, PauliSum, StateVector, Variant};

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    (0..(1u64 << n), 0..(1u64 << n)).prop_map(move |(x, z)| PauliString::from_masks(n, x, z))
}

fn pauli_sum(n: usize, max_terms: usize, complex: bool) -> impl Strategy<Value = PauliSum<f64>> {
    prop::collection::vec((pauli_string(n), -1.0..1.0f64, -1.0..1.0f64), 1..=max_terms).prop_map(move |ts| {
        let mut s = PauliSum::zero(n);
        for (p, re, im) in ts {
            s.add_term(p, Complex64::new(re, if complex { im } else { 0.0 }));
        }
        s
    })
}

fn gate(n: usize) -> impl Strategy<Value = Gate<f64>> {
    prop_oneof![
        (0..n).prop_map(Gate::H),
        (0..n, -3.0..3.0f64).prop_map(|(q, a)| Gate::Rx(q, a)),
        (0..n, -3.0..3.0f64).prop_map(|(q, a)| Gate::Rz(q, a)),
        (0..n, 1..n).prop_map(move |(c, d)| Gate::Cnot { control: c, target: (c + d) % n }),
        (pauli_string(n), -3.0..3.0f64)
            .prop_filter("identity gadget", |(p, _)| !p.is_identity())
            .prop_map(|(p, a)| Gate::Gadget { string: p, angle: a, sign_control: None, enable_control: None }),
    ]
}

#[test]
fn trotter_first_order_slope() {
    let (dt, err) = trotter_errors(TrotterOrder::First);
    let s = slope(&dt, &err);
    assert!((0.9..=1.1).contains(&s), "slope {s}");
}

#[test]
fn trotter_second_order_slope() {
    let (dt, err) = trotter_errors(TrotterOrder::Second);
    let s = slope(&dt, &err);
    assert!((1.8..=2.2).contains(&s), "slope {s}");
}

/// Global error of the split-step Lindblad propagation at t = 4 with exact sub-steps.
#[test]
fn strang_splitting_second_order_slope() {
    let m = two_level_damping(0.6, 0.9, 0.1).unwrap();
    let opts = LindbladOptions { unitary: StepMethod::Exact, nonunitary: StepMethod::Exact, ..LindbladOptions::default() };
    let (mut dts, mut errs) = (vec![], vec![]);
    for steps in [8usize, 16, 32, 64] {
        let dt = 4.0 / steps as f64;
        let run = lindblad_propagate(&m, dt, steps, 6, &opts).unwrap();
        let ex = exact_lindblad(&m, dt, steps).unwrap();
        dts.push(dt);
        errs.push((run.populations[steps][0] - ex[steps].1[0]).abs());
    }
    let s = slope(&dts, &errs);
    assert!((1.8..=2.2).contains(&s), "slope {s}, errors {errs:?}");
}

#[test]
fn commuting_terms_are_exact() {
    let h = PauliSum::<f64>::from_real_terms(3, &[("ZZI", 0.4), ("IZZ", -0.8), ("ZIZ", 0.3), ("IIZ", 1.1)]).unwrap();
    let exact = qetu_core::oracle::unitary_evolution(&h, 0.9).unwrap();
    for steps in [1, 3] {
        let c = trotter_circuit(&h, 0.9, steps).unwrap().to_dense().unwrap();
        assert!(phase_free_diff(&c, &exact) < 1e-12);
    }
}

#[test]
fn split_round_trip_on_lindbladian() {
    let m = two_level_damping(0.3, 0.2, 0.1).unwrap();
    let l = build_lindbladian(&m).unwrap();
    let (h1, h2) = hermitian_split(&l);
    let back = &h2 + &h1.scale(Complex64::new(0.0, 1.0));
    assert!((&back - &l).terms().all(|(_, c)| c.norm() < 1e-12));
}

#[test]
fn solved_phases_are_exactly_symmetric() {
    let plan = small_plan(16, 1.5, 1, Variant::FwdRev, Backend::Exact);
    let p = &plan.phases.phases;
    for k in 0..p.len() {
        assert_eq!(p[k].to_bits(), p[p.len() - 1 - k].to_bits());
    }
}

#[test]
fn anticommutation_of_jordan_wigner_operators() {
    let n = 4;
    let id = CMat::<f64>::identity(1 << n);
    let ops: Vec<CMat<f64>> = (0..n).map(|p| jw_annihilation::<f64>(n, p).to_dense()).collect();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&ops[i], &ops[j]);
            let ab = a.matmul(&b.adjoint()).add(&b.adjoint().matmul(a));
            let want = if i == j { id.clone() } else { CMat::zeros(16, 16) };
            assert!(ab.sub(&want).max_abs() < 1e-12);
            let aa = a.matmul(b).add(&b.matmul(a));
            assert!(aa.max_abs() < 1e-12);
        }
    }
}

fn dense_lindbladian(h: &CMat<f64>, jumps: &[CMat<f64>]) -> CMat<f64> {
    let dim = h.rows;
    let id = CMat::identity(dim);
    let i = Complex64::new(0.0, 1.0);
    let transpose = |m: &CMat<f64>| m.adjoint().map(|z| z.conj());
    let mut l = id.kron(h).scale(-i).add(&transpose(h).kron(&id).scale(i));
    for j in jumps {
        let jc = j.map(|z| z.conj());
        let jdj = j.adjoint().matmul(j);
        let jtjc = transpose(j).matmul(&jc);
        l = l.add(&jc.kron(j)).sub(&id.kron(&jdj).scale(Complex64::new(0.5, 0.0))).sub(&jtjc.kron(&id).scale(Complex64::new(0.5, 0.0)));
    }
    l
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circuits_preserve_norm(gates in prop::collection::vec(gate(4), 1..40), seed in 0u64..1000) {
        let mut c = Circuit::new(4);
        for g in gates {
            c.push(g).unwrap();
        }
        let s = apply_circuit(&c, &test_state(4, seed)).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn circuit_action_matches_dense_product(gates in prop::collection::vec(gate(3), 1..20), seed in 0u64..1000) {
        let mut c = Circuit::new(3);
        for g in gates {
            c.push(g).unwrap();
        }
        let psi = test_state(3, seed);
        let s = apply_circuit(&c, &psi).unwrap();
        let v = c.to_dense().unwrap().matvec(psi.amplitudes());
        prop_assert!(max_diff(s.amplitudes(), &v) < 1e-10);
        let compiled = apply_circuit(&c.compile(), &psi).unwrap();
        prop_assert!(max_diff(compiled.amplitudes(), &v) < 1e-10);
    }

    #[test]
    fn pauli_algebra_matches_dense(a in pauli_sum(3, 6, true), b in pauli_sum(3, 6, true)) {
        let (da, db) = (a.to_dense(), b.to_dense());
        prop_assert!((&a * &b).to_dense().sub(&da.matmul(&db)).max_abs() < 1e-12);
        prop_assert!((&a + &b).to_dense().sub(&da.add(&db)).max_abs() < 1e-12);
        prop_assert!(a.adjoint().to_dense().sub(&da.adjoint()).max_abs() < 1e-12);
        let t = da.adjoint().map(|z| z.conj());
        prop_assert!(a.transpose().to_dense().sub(&t).max_abs() < 1e-12);
        prop_assert!(a.conjugate().to_dense().sub(&da.map(|z| z.conj())).max_abs() < 1e-12);
    }

    #[test]
    fn text_format_round_trips(a in pauli_sum(4, 8, true)) {
        let back = PauliSum::<f64>::from_text(&a.to_text()).unwrap();
        prop_assert!((&back - &a).terms().all(|(_, c)| c.norm() < 1e-6));
    }

    #[test]
    fn hermitian_split_round_trip(l in pauli_sum(3, 10, true)) {
        let (h1, h2) = hermitian_split(&l);
        prop_assert!(h1.is_hermitian() && h2.is_hermitian());
        let back = &h2 + &h1.scale(Complex64::new(0.0, 1.0));
        prop_assert!((&back - &l).terms().all(|(_, c)| c.norm() < 1e-12));
    }

    #[test]
    fn lindbladian_matches_kronecker_products(h in pauli_sum(1, 3, false), l1 in pauli_sum(1, 3, true), l2 in pauli_sum(1, 3, true)) {
        let model = LindbladModel::new(h.clone(), vec![l1.clone(), l2.clone()]).unwrap();
        let sym = build_lindbladian(&model).unwrap().to_dense();
        let want = dense_lindbladian(&h.to_dense(), &[l1.to_dense(), l2.to_dense()]);
        prop_assert!(sym.sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn bounds_are_nested(h in pauli_sum(3, 8, false)) {
        let ex = bounds_exact(&h).unwrap();
        let ge = bounds_gershgorin(&h).unwrap();
        let ns = bounds_norm_sum(&h).unwrap();
        prop_assert!(ns.e0_lower <= ge.e0_lower + 1e-12 && ge.e0_lower <= ex.e0_lower + 1e-12);
        prop_assert!(ex.emax_upper <= ge.emax_upper + 1e-12 && ge.emax_upper <= ns.emax_upper + 1e-12);
    }

    #[test]
    fn qsp_response_is_even_periodic_and_bounded(red in prop::collection::vec(-3.2..3.2f64, 1..8), x in 0.0..1.6f64) {
        let d = 2 * (red.len() - 1);
        let phases: Vec<f64> = (0..=d).map(|k| red[k.min(d - k)]).collect();
        let p = qsp_eval(&phases, x);
        prop_assert!(p.abs() <= 1.0 + 1e-12);
        prop_assert!((p - qsp_eval(&phases, -x)).abs() < 1e-12);
        prop_assert!((p - qsp_eval(&phases, std::f64::consts::PI - x)).abs() < 1e-12);
    }

    #[test]
    fn qsp_response_is_a_cosine_series(red in prop::collection::vec(-3.2..3.2f64, 1..6)) {
        // interpolate on the solver nodes and compare off-node
        let d = 2 * (red.len() - 1);
        let phases: Vec<f64> = (0..=d).map(|k| red[k.min(d - k)]).collect();
        let m = d / 2 + 1;
        let nodes: Vec<f64> = solver_nodes(m);
        let mut coeffs = vec![0.0; m];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let s: f64 = nodes.iter().map(|&x| qsp_eval(&phases, x) * (2.0 * k as f64 * x).cos()).sum();
            *ck = s * if k == 0 { 1.0 } else { 2.0 } / m as f64;
        }
        let cheb = ChebyshevExpansion::from_coeffs(coeffs);
        for j in 0..50 {
            let x = 1.5 * j as f64 / 49.0;
            prop_assert!((cheb.eval(x) - qsp_eval(&phases, x)).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_matches_finite_differences(red in prop::collection::vec(-1.5..1.5f64, 2..7), k in 0usize..7) {
        let k = k % red.len();
        let d = 2 * (red.len() - 1);
        let nodes: Vec<f64> = solver_nodes(red.len());
        let targets: Vec<f64> = nodes.iter().map(|x| 0.4 * (2.0 * x).cos() + 0.1).collect();
        let (f0, g) = objective_and_gradient(&red, d, &nodes, &targets);
        let h = 1e-6;
        let (mut up, mut dn) = (red.clone(), red.clone());
        up[k] += h;
        dn[k] -= h;
        let fd = (objective_and_gradient(&up, d, &nodes, &targets).0 - objective_and_gradient(&dn, d, &nodes, &targets).0) / (2.0 * h);
        let scale = g[k].abs().max(1e-3 * f0.max(1e-3));
        prop_assert!((g[k] - fd).abs() / scale < 1e-5, "analytic {} fd {}", g[k], fd);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn variants_agree(seed in 0u64..10_000, tau in 0.2..2.0f64, steps in 1usize..4) {
        let psi = test_state(3, seed);
        let a = small_plan(10, tau, steps, Variant::FwdRev, Backend::Fast);
        let b = a.clone().with_variant(Variant::ControlFree);
        let ra = PreparedQetu::new(&a).unwrap().apply(&psi).unwrap();
        let rb = PreparedQetu::new(&b).unwrap().apply(&psi).unwrap();
        prop_assert!(max_diff(ra.state.amplitudes(), rb.state.amplitudes()) < 1e-6);
        prop_assert!((ra.success_prob - rb.success_prob).abs() < 1e-6);
    }

    #[test]
    fn exact_backend_matches_dense_oracle(seed in 0u64..10_000, tau in 0.2..3.0f64, half in 1usize..8, cf in any::<bool>()) {
        let variant = if cf { Variant::ControlFree } else { Variant::FwdRev };
        let plan = small_plan(2 * half, tau, 1, variant, Backend::Exact);
        let psi = test_state(3, seed);
        let r = PreparedQetu::new(&plan).unwrap().apply(&psi).unwrap();
        let v = dense_qsp_block(&plan).unwrap().matvec(psi.amplitudes());
        let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let v: Vec<_> = v.iter().map(|z| z / p.sqrt()).collect();
        prop_assert!(max_diff(r.state.amplitudes(), &v) < 1e-6);
        prop_assert!((r.success_prob - p).abs() < 1e-6);
    }

    #[test]
    fn ground_sweep_states_stay_normalized(tau in 0.1..2.0f64) {
        let h = qetu_core::pauli::build_tfim(3, 1.0, 0.8).unwrap();
        let opts = QetuOptions { trotter_steps: 2, ..QetuOptions::default() };
        let psi = StateVector::uniform(3);
        let r = qetu_core::apps::ground_state_sweep(&h, &psi, &[tau], 12, qetu_core::apps::SweepMode::SingleShot, &opts).unwrap();
        let p = &r.points[0];
        prop_assert!(p.success_prob > 0.0 && p.success_prob <= 1.0);
    }
}
