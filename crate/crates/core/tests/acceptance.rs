//! Acceptance suite: one PASS/FAIL line per criterion, then a single assertion.
//!
//! Run with `cargo test -p qetu-core --test acceptance -- --nocapture` to see the lines.

mod common;

use std::time::Instant;

use common::*;
use num_complex::Complex64;
use qetu_core::approx::{ite_target, objective_and_gradient, qsp_eval, solver_nodes, synthesize, verify_phases, Direction, VERIFY_POINTS};
use qetu_core::apps::*;
use qetu_core::oracle::{self, dense_qsp_block, eigh, exact_gibbs, exact_lindblad, success_at_accuracy, trace_distance, transform_success};
use qetu_core::pauli::{build_hubbard, build_lindbladian, build_tfim, hermitian_split, two_level_damping};
use qetu_core::qetu::PreparedQetu;
use qetu_core::sim::{apply_circuit, TrotterOrder};
use qetu_core::spectrum::{bounds_exact, make_scaled};
use qetu_core::{Backend, Circuit, Gate, PauliString, StateVector, Variant};

const MILLI: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn hubbard_start() -> (qetu_core::PauliSum<f64>, StateVector<f64>) {
    (build_hubbard(4, 1.0, 1.0).unwrap(), StateVector::basis(8, hubbard_neel_index(4)))
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let h = build_hubbard(4, 1.0, 1.0).unwrap();
    let sc = make_scaled(&h, bounds_exact(&h).unwrap(), 0.05).unwrap();
    let f = ite_target(&sc, 5.0, Direction::Forward).unwrap();
    let mut devs = vec![];
    let mut verify350 = f64::NAN;
    for d in [150, 250, 350] {
        match synthesize(&f, d, 1e-6, 500) {
            Ok((cheb, ph)) => {
                devs.push(cheb.max_deviation);
                if d == 350 {
                    verify350 = verify_phases(&ph, &cheb, 0.05, VERIFY_POINTS);
                }
            }
            Err(e) => return outcome(false, format!("d={d}: {e}")),
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = verify350 <= 1e-6 && secs <= 300.0 && devs[0] > devs[2] && devs[1] > devs[2];
    outcome(
        pass,
        format!("d=350 verify residual {verify350:.2e}; fit deviation d=150/250/350 {:.3}/{:.3}/{:.3}; {secs:.1}s", devs[0], devs[1], devs[2]),
    )
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let (h, psi) = hubbard_start();
    let taus: Vec<f64> = (1..=10).map(|k| 0.5 * k as f64).collect();
    let opts = QetuOptions::default();
    let r = match ground_state_sweep(&h, &psi, &taus, 350, SweepMode::SingleShot, &opts) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let e = eigh(&h).unwrap();
    let mut worst: f64 = 0.0;
    for p in &r.points {
        let (s, _) = oracle::exact_ite(&h, &psi, p.tau).unwrap();
        worst = worst.max((p.energy - oracle::energy(&e, &s)).abs());
    }
    let last = r.points.last().unwrap();
    let err = last.energy - e.values[0];
    let secs = t0.elapsed().as_secs_f64();
    let pass = err.abs() <= 2.0 * MILLI && (0.05..=0.20).contains(&last.success_prob) && worst <= 3.0 * MILLI && secs <= 1800.0;
    outcome(
        pass,
        format!(
            "final error {:.3} mEh, success {:.4}, worst curve deviation {:.3} mEh, {} gates, {secs:.1}s",
            err / MILLI,
            last.success_prob,
            worst / MILLI,
            last.gates
        ),
    )
}

fn criterion_3() -> Outcome {
    let (h, psi) = hubbard_start();
    let e = eigh(&h).unwrap();
    let (e0, e1) = (e.values[0], e.values[1]);
    let opts = QetuOptions::default();
    match eigenstate_filter(&h, &psi, 0.5 * (e0 + e1), 0.5 * (e1 - e0), 350, &opts) {
        Ok((r, _)) => {
            let err = r.energy - e0;
            outcome(
                err.abs() <= 2.0 * MILLI && (0.05..=0.20).contains(&r.success_prob),
                format!("error {:.3} mEh, success {:.4}", err / MILLI, r.success_prob),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_4() -> Outcome {
    let (h, psi) = hubbard_start();
    let e = eigh(&h).unwrap();
    let opts = QetuOptions::default();
    let frag = ground_state_sweep(&h, &psi, &[5.0], 30, SweepMode::Fragmented { delta_tau: 1.25 }, &opts);
    let single = ground_state_sweep(&h, &psi, &[5.0], 350, SweepMode::SingleShot, &opts);
    match (frag, single) {
        (Ok(f), Ok(s)) => {
            let (fl, sl) = (f.points.last().unwrap(), s.points.last().unwrap());
            let err = fl.energy - e.values[0];
            let dp = (fl.success_prob - sl.success_prob).abs();
            outcome(
                f.points.len() == 5 && err.abs() <= 5.0 * MILLI && 2 * fl.gates < sl.gates && dp <= 0.02,
                format!(
                    "error {:.3} mEh, gates {} vs single-shot {}, cumulative success {:.4} vs {:.4}",
                    err / MILLI,
                    fl.gates,
                    sl.gates,
                    fl.success_prob,
                    sl.success_prob
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, e.to_string()),
    }
}

fn criterion_5() -> Outcome {
    let h = build_hubbard(4, 1.0, 1.0).unwrap();
    let e = eigh(&h).unwrap();
    let (mut xs, mut ys) = (vec![], vec![]);
    for b in (0..256usize).filter(|b| b.count_ones() == 4) {
        let s = StateVector::basis(8, b);
        let w: Vec<f64> = e.components(s.amplitudes()).iter().map(|a| a.norm_sqr()).collect();
        let g2: f64 = w.iter().zip(&e.values).filter(|(_, x)| **x - e.values[0] < 1e-8).map(|(w, _)| w).sum();
        if g2 < 1e-12 {
            continue;
        }
        xs.push(g2.sqrt());
        ys.push(transform_success(&e, &w, 5.0, e.values[0]));
    }
    let s = slope(&xs, &ys);
    outcome((1.9..=2.1).contains(&s), format!("slope {s:.4} over {} determinants", xs.len()))
}

fn criterion_6() -> Outcome {
    let mut probs = vec![];
    for u in [5.0, 10.0, 20.0, 40.0] {
        let h = build_hubbard(4, 1.0, u).unwrap();
        let e = eigh(&h).unwrap();
        let psi = StateVector::basis(8, hubbard_neel_index(4));
        match success_at_accuracy(&e, &psi, e.values[0], 1.6 * MILLI) {
            Some((_, p)) => probs.push(p),
            None => return outcome(false, format!("U={u}: accuracy not reachable")),
        }
    }
    let mono = probs.windows(2).all(|w| w[1] < w[0]);
    outcome(mono, format!("success at 1.6 mEh for U/t=5,10,20,40: {:.2e}, {:.2e}, {:.2e}, {:.2e}", probs[0], probs[1], probs[2], probs[3]))
}

fn criterion_7() -> Outcome {
    let opts = QetuOptions { trotter_steps: 8, ..QetuOptions::default() };
    let (mut dm, mut dz, mut dtr): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut gates = 0;
    for beta in [0.5, 1.0, 2.0] {
        for g in [0.1, 0.3, 1.0, 3.0, 10.0] {
            let h = build_tfim(4, 1.0, g).unwrap();
            let r = match gibbs_prepare(&h, beta, 50, &opts) {
                Ok(r) => r,
                Err(e) => return outcome(false, format!("beta={beta} g={g}: {e}")),
            };
            let ex = exact_gibbs(&h, beta).unwrap();
            dm = dm.max((r.magnetization - ex.magnetization).abs()).max((r.abs_magnetization - ex.abs_magnetization).abs());
            dz = dz.max((r.partition / ex.z - 1.0).abs());
            dtr = dtr.max(trace_distance(&r.rho_sys, &ex.rho));
            gates = r.gates;
        }
    }
    let pass = dm <= 0.1 && dz <= 0.05 && dtr <= 0.02 && (6750 / 3..=6750 * 3).contains(&gates);
    outcome(pass, format!("max |dM| {dm:.4}, max Z rel error {:.2}%, max trace distance {dtr:.4}, {gates} gates", 100.0 * dz))
}

fn criterion_8() -> Outcome {
    let mut lines = vec![];
    let mut pass = true;
    for (delta, omega) in [(0.0, 0.0), (0.5, 0.3)] {
        let m = two_level_damping(delta, omega, 0.1).unwrap();
        let r = match lindblad_propagate(&m, 1.0, 10, 6, &LindbladOptions::default()) {
            Ok(r) => r,
            Err(e) => return outcome(false, e.to_string()),
        };
        let ex = exact_lindblad(&m, 1.0, 10).unwrap();
        let dev = ex
            .iter()
            .zip(&r.populations)
            .flat_map(|((_, a), b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        let cum = *r.cumulative_success.last().unwrap();
        pass &= dev <= 0.02 && cum >= 0.10 && (904 / 3..=904 * 3).contains(&r.per_step_gates);
        lines.push(format!("delta={delta} omega={omega}: max dev {dev:.4}, success {cum:.3}, {} gates/step", r.per_step_gates));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_9() -> Outcome {
    let mut failed = vec![];
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failed.push(name.to_string());
        }
    };

    // norm preservation
    let mut c = Circuit::new(4);
    for k in 0..60usize {
        let q = k % 4;
        let g = match k % 5 {
            0 => Gate::H(q),
            1 => Gate::Rx(q, 0.37 * k as f64),
            2 => Gate::Rz(q, -0.21 * k as f64),
            3 => Gate::Cnot { control: q, target: (q + 1) % 4 },
            _ => Gate::Gadget { string: PauliString::from_masks(4, 0b0101, 0b1100), angle: 0.4, sign_control: None, enable_control: None },
        };
        c.push(g).unwrap();
    }
    let s = apply_circuit(&c, &test_state(4, 1)).unwrap();
    check("norm", (s.norm_sqr() - 1.0).abs() < 1e-9);

    // product-formula orders
    let (dt, err) = trotter_errors(TrotterOrder::First);
    check("trotter slope", (0.9..=1.1).contains(&slope(&dt, &err)));
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
    check("strang slope", (1.8..=2.2).contains(&slope(&dts, &errs)));

    // QSP parity, boundedness, symmetry
    let plan = small_plan(16, 1.5, 2, Variant::FwdRev, Backend::Fast);
    let ph = &plan.phases.phases;
    check("symmetry", (0..ph.len()).all(|k| ph[k].to_bits() == ph[ph.len() - 1 - k].to_bits()));
    let mut parity = true;
    for j in 0..200 {
        let x = -3.0 + 0.03 * j as f64;
        let p = qsp_eval(ph, x);
        parity &= p.abs() <= 1.0 + 1e-12 && (p - qsp_eval(ph, -x)).abs() < 1e-12;
    }
    check("parity/bound", parity);

    // variant and dense-oracle equivalence
    let psi = test_state(3, 4);
    let a = PreparedQetu::new(&plan).unwrap().apply(&psi).unwrap();
    let b = PreparedQetu::new(&plan.clone().with_variant(Variant::ControlFree)).unwrap().apply(&psi).unwrap();
    check("variants", max_diff(a.state.amplitudes(), b.state.amplitudes()) < 1e-6);
    let ex_plan = plan.clone().with_backend(Backend::Exact);
    let r = PreparedQetu::new(&ex_plan).unwrap().apply(&psi).unwrap();
    let v = dense_qsp_block(&ex_plan).unwrap().matvec(psi.amplitudes());
    let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let v: Vec<Complex64> = v.iter().map(|z| z / p.sqrt()).collect();
    check("dense oracle", max_diff(r.state.amplitudes(), &v) < 1e-6 && (r.success_prob - p).abs() < 1e-6);

    // Hermitian split
    let l = build_lindbladian(&two_level_damping(0.3, 0.2, 0.1).unwrap()).unwrap();
    let (h1, h2) = hermitian_split(&l);
    let back = &h2 + &h1.scale(Complex64::new(0.0, 1.0));
    check("split", (&back - &l).terms().all(|(_, c)| c.norm() < 1e-12));

    // gradient vs central differences
    let red = vec![0.3, -0.7, 0.2, 1.1, -0.4];
    let nodes: Vec<f64> = solver_nodes(5);
    let targets: Vec<f64> = nodes.iter().map(|x| 0.5 * (2.0 * x).cos()).collect();
    let (_, g) = objective_and_gradient(&red, 8, &nodes, &targets);
    let mut grad_ok = true;
    for k in 0..5 {
        let (mut up, mut dn) = (red.clone(), red.clone());
        up[k] += 1e-6;
        dn[k] -= 1e-6;
        let fd = (objective_and_gradient(&up, 8, &nodes, &targets).0 - objective_and_gradient(&dn, 8, &nodes, &targets).0) / 2e-6;
        grad_ok &= (g[k] - fd).abs() <= 1e-5 * g[k].abs().max(1e-3);
    }
    check("gradient", grad_ok);

    let pass = failed.is_empty();
    outcome(pass, if pass { "all property checks hold (full randomized suites in tests/properties.rs)".into() } else { format!("failed: {}", failed.join(", ")) })
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("phase solver", criterion_1),
        ("ground-state sweep", criterion_2),
        ("eigenstate filter", criterion_3),
        ("fragmentation", criterion_4),
        ("gamma^2 law", criterion_5),
        ("strong correlation", criterion_6),
        ("Gibbs states", criterion_7),
        ("Lindblad dynamics", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.pass;
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    assert!(all, "acceptance criteria failed");
}
