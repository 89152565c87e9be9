//! Subcommand drivers: validate, compute, write `PREFIX.csv` and `PREFIX.json`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qetu_core::approx::{heaviside_target, ite_target, synthesize, verify_phases, write_phase_file, Direction, TargetFunction, VERIFY_POINTS};
use qetu_core::apps::{self, eigenstate_filter, gibbs_prepare, ground_state_sweep, hubbard_neel_index, lindblad_propagate, LindbladOptions, QetuOptions, StepMethod, SweepMode};
use qetu_core::linalg::CMat;
use qetu_core::oracle;
use qetu_core::pauli::{build_hubbard, build_tfim, two_level_damping};
use qetu_core::spectrum::{bounds_exact, bounds_gershgorin, bounds_norm_sum, make_scaled, SpectralBounds, MAX_GERSHGORIN_QUBITS};
use qetu_core::{PauliString, PauliSum, StateVector};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{BoundsArgs, DirectionArg, Failure, GibbsArgs, GroundArgs, LindbladArgs, ModeArg, ModelArgs, ModelKind, OutArgs, PhasesArgs, QetuArgs, StepArg, TargetKindArg};

/// Largest register the dense oracle columns are computed for.
const ORACLE_QUBITS: usize = 12;

type Res<T> = Result<T, Failure>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Res<()> {
    if ok {
        Ok(())
    } else {
        Err(Failure::config(msg()))
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn prefix(out: &OutArgs, default: &str) -> PathBuf {
    out.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Res<()> {
    let io = |e: csv::Error| Failure::from(anyhow::Error::new(e).context(format!("writing {}", path.display())));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::from(anyhow::Error::new(e)))?;
    Ok(())
}

fn write_json(path: &Path, summary: Value, config: Value) -> Res<()> {
    let doc = json!({ "status": "ok", "config": config, "summary": summary });
    let text = serde_json::to_string_pretty(&doc).expect("json");
    std::fs::write(path, text + "\n").map_err(|e| Failure::from(anyhow::Error::new(e).context(format!("writing {}", path.display()))))
}

fn validate_qetu(q: &QetuArgs) -> Res<()> {
    check(q.eta > 0.0 && q.eta < std::f64::consts::FRAC_PI_4, || format!("eta = {} must lie in (0, pi/4)", q.eta))?;
    check(q.tol > 0.0, || "tol must be positive".into())?;
    check(q.max_iter > 0, || "max-iter must be positive".into())
}

fn validate_degree(d: usize) -> Res<()> {
    check(d >= 2 && d % 2 == 0, || format!("degree {d} must be even and at least 2"))
}

fn qetu_options(q: &QetuArgs, trotter: usize) -> QetuOptions {
    QetuOptions { eta: q.eta, bounds: q.bounds, variant: q.variant, backend: q.backend, trotter_steps: trotter, tol: q.tol, max_iter: q.max_iter }
}

fn read_hamiltonian(path: &Option<PathBuf>) -> Res<PauliSum<f64>> {
    let Some(p) = path else {
        return Err(Failure::config("--model file needs --hamiltonian-file"));
    };
    let text = std::fs::read_to_string(p).map_err(|e| Failure::config(format!("reading {}: {e}", p.display())))?;
    let h = PauliSum::from_text(&text)?;
    check(h.is_hermitian(), || format!("{} is not Hermitian", p.display()))?;
    Ok(h)
}

fn dump_hamiltonian(h: &PauliSum<f64>, path: &Option<PathBuf>) -> Res<()> {
    if let Some(p) = path {
        std::fs::write(p, h.to_text()).map_err(|e| Failure::from(anyhow::Error::new(e).context(format!("writing {}", p.display()))))?;
    }
    Ok(())
}

fn load_model(m: &ModelArgs) -> Res<PauliSum<f64>> {
    for (name, v) in [("t", m.t_hop), ("u", m.u), ("j", m.j), ("g", m.g)] {
        check(v.is_finite(), || format!("--{name} must be finite"))?;
    }
    let h = match m.model {
        ModelKind::Hubbard => build_hubbard(m.sites, m.t_hop, m.u)?,
        ModelKind::Tfim => build_tfim(m.sites, m.j, m.g)?,
        ModelKind::File => read_hamiltonian(&m.hamiltonian_file)?,
    };
    dump_hamiltonian(&h, &m.dump_hamiltonian)?;
    Ok(h)
}

/// Midpoint and half-width of the lowest gap (dense spectrum, distinct levels).
fn gap_defaults(h: &PauliSum<f64>, mu: Option<f64>, width: Option<f64>) -> Res<(f64, f64)> {
    if let (Some(m), Some(w)) = (mu, width) {
        return Ok((m, w));
    }
    check(h.n_qubits() <= ORACLE_QUBITS, || "give --mu and --width explicitly for registers above 12 qubits".into())?;
    let e = oracle::eigh(h)?;
    let e0 = e.values[0];
    let e1 = e.values.iter().copied().find(|v| *v - e0 > 1e-8).ok_or_else(|| Failure::config("spectrum has a single level"))?;
    Ok((mu.unwrap_or(0.5 * (e0 + e1)), width.unwrap_or(0.5 * (e1 - e0))))
}

pub fn phases(a: &PhasesArgs, config: Value) -> Res<()> {
    validate_qetu(&a.qetu)?;
    validate_degree(a.degree)?;
    check(a.tau >= 0.0, || "tau must be non-negative".into())?;
    check(a.points >= 2, || "points must be at least 2".into())?;
    let h = load_model(&a.model)?;
    let b = qetu_core::spectrum::bounds_by(&h, a.qetu.bounds)?;
    let sc = make_scaled(&h, b, a.qetu.eta)?;
    let target: TargetFunction<f64> = match a.target {
        TargetKindArg::Ite => {
            let dir = match a.direction {
                DirectionArg::Forward => Direction::Forward,
                DirectionArg::Reverse => Direction::Reverse,
            };
            ite_target(&sc, a.tau, dir)?
        }
        TargetKindArg::Heaviside => {
            let (mu, w) = gap_defaults(&h, a.mu, a.width)?;
            heaviside_target(&sc, mu * sc.t + sc.sigma, w * sc.t)?
        }
    };
    let (cheb, ph) = synthesize(&target, a.degree, a.qetu.tol, a.qetu.max_iter)?;
    let pre = prefix(&a.output, "phases");
    let phase_path = a.phase_file.clone().unwrap_or_else(|| with_ext(&pre, "phases"));
    write_phase_file(&phase_path, &ph)?;
    let (lo, hi) = target.domain();
    let rows: Vec<Vec<String>> = (0..a.points)
        .map(|j| {
            let x = lo + (hi - lo) * j as f64 / (a.points - 1) as f64;
            vec![num(x), num(sc.unscale_energy(x)), num(target.eval(x)), num(cheb.eval(x)), num(ph.eval(x))]
        })
        .collect();
    write_csv(&with_ext(&pre, "csv"), &["x", "energy", "target", "expansion", "response"], &rows)?;
    let summary = json!({
        "degree": a.degree,
        "residual": ph.residual,
        "verify_residual": verify_phases(&ph, &cheb, a.qetu.eta, VERIFY_POINTS),
        "max_deviation": cheb.max_deviation,
        "sup_norm": cheb.sup_norm,
        "headroom": cheb.scale,
        "normalization": target.normalization(),
        "t": sc.t,
        "sigma": sc.sigma,
        "e0_lower": sc.bounds.e0_lower,
        "emax_upper": sc.bounds.emax_upper,
        "phase_file": phase_path,
    });
    write_json(&with_ext(&pre, "json"), summary, config)
}

pub fn bounds(a: &BoundsArgs, config: Value) -> Res<()> {
    check(a.eta > 0.0 && a.eta < std::f64::consts::FRAC_PI_4, || format!("eta = {} must lie in (0, pi/4)", a.eta))?;
    let h = load_model(&a.model)?;
    let n = h.n_qubits();
    let mut found: Vec<(&str, SpectralBounds<f64>)> = vec![("norm_sum", bounds_norm_sum(&h)?)];
    if n <= MAX_GERSHGORIN_QUBITS {
        found.push(("gershgorin", bounds_gershgorin(&h)?));
    }
    if n <= oracle::MAX_DENSE_QUBITS {
        found.push(("exact", bounds_exact(&h)?));
    }
    let mut rows = vec![];
    let mut summary = serde_json::Map::new();
    for (name, b) in found {
        let sc = make_scaled(&h, b, a.eta)?;
        rows.push(vec![name.to_string(), num(b.e0_lower), num(b.emax_upper), num(b.width()), num(sc.t), num(sc.sigma)]);
        summary.insert(name.into(), json!({ "e0_lower": b.e0_lower, "emax_upper": b.emax_upper, "t": sc.t, "sigma": sc.sigma }));
    }
    let pre = prefix(&a.output, "bounds");
    write_csv(&with_ext(&pre, "csv"), &["method", "e0_lower", "emax_upper", "width", "t", "sigma"], &rows)?;
    summary.insert("n_qubits".into(), n.into());
    summary.insert("terms".into(), h.len().into());
    write_json(&with_ext(&pre, "json"), Value::Object(summary), config)
}

fn initial_state(spec: &str, model: ModelKind, h: &PauliSum<f64>) -> Res<StateVector<f64>> {
    let n = h.n_qubits();
    match spec {
        "auto" => Ok(match model {
            ModelKind::Hubbard => StateVector::basis(n, hubbard_neel_index(n / 2)),
            _ => StateVector::zero(n),
        }),
        "uniform" => Ok(StateVector::uniform(n)),
        s => {
            let i: usize = s.parse().map_err(|_| Failure::config(format!("--initial {s:?}: expected auto, uniform or a basis index")))?;
            check(i < 1usize << n, || format!("basis index {i} outside a {n}-qubit register"))?;
            Ok(StateVector::basis(n, i))
        }
    }
}

fn bitstring(i: usize, n: usize) -> String {
    (0..n).rev().map(|q| if i >> q & 1 == 1 { '1' } else { '0' }).collect()
}

fn finish_state(state: &StateVector<f64>, a: &GroundArgs, summary: &mut serde_json::Map<String, Value>) -> Res<()> {
    if let Some(p) = &a.dump_state {
        state.save(p)?;
        summary.insert("state_dump".into(), json!(p));
    }
    if a.shots > 0 {
        let counts = state.sample(a.shots, a.output.seed)?;
        let n = state.n_qubits();
        let m: serde_json::Map<String, Value> = counts.into_iter().map(|(k, c)| (bitstring(k, n), c.into())).collect();
        summary.insert("samples".into(), json!({ "shots": a.shots, "seed": a.output.seed, "counts": m }));
    }
    Ok(())
}

pub fn groundstate(a: &GroundArgs, config: Value) -> Res<()> {
    validate_qetu(&a.qetu)?;
    validate_degree(a.degree)?;
    check(a.trotter >= 1, || "trotter must be at least 1".into())?;
    check(a.tau_max >= 0.0 && a.tau_max.is_finite(), || "tau-max must be non-negative".into())?;
    check(a.tau_step > 0.0, || "tau-step must be positive".into())?;
    check(a.delta_tau > 0.0, || "delta-tau must be positive".into())?;
    let h = load_model(&a.model)?;
    let psi = initial_state(&a.initial, a.model.model, &h)?;
    let opts = qetu_options(&a.qetu, a.trotter);
    let n = h.n_qubits();
    let eig = if n <= ORACLE_QUBITS { Some(oracle::eigh(&h)?) } else { None };
    let e0 = eig.as_ref().map(|e| e.values[0]);
    let header = ["tau", "energy", "exact_energy", "energy_error", "success_prob", "gates", "two_qubit_gates"];
    let pre = prefix(&a.output, "groundstate");
    let mut summary = serde_json::Map::new();
    summary.insert("n_qubits".into(), n.into());
    summary.insert("exact_e0".into(), json!(e0));
    summary.insert("initial_energy".into(), json!(psi.expectation(&h)?));
    let rows = if let ModeArg::Filter = a.mode {
        let (mu, w) = gap_defaults(&h, a.mu, a.width)?;
        let (r, state) = eigenstate_filter(&h, &psi, mu, w, a.degree, &opts)?;
        let err = e0.map(|e| r.energy - e);
        summary.insert("filter".into(), json!({ "mu": mu, "width": w, "result": r }));
        summary.insert("final_energy".into(), json!(r.energy));
        summary.insert("final_success_prob".into(), json!(r.success_prob));
        finish_state(&state, a, &mut summary)?;
        vec![vec![String::new(), num(r.energy), String::new(), opt(err), num(r.success_prob), r.gates.to_string(), r.two_qubit_gates.to_string()]]
    } else {
        let steps = (a.tau_max / a.tau_step + 1e-9).floor() as usize;
        let taus: Vec<f64> = (1..=steps).map(|k| a.tau_step * k as f64).collect();
        check(!taus.is_empty(), || "tau grid is empty (tau-max below tau-step)".into())?;
        let mode = match a.mode {
            ModeArg::Fragmented => SweepMode::Fragmented { delta_tau: a.delta_tau },
            _ => SweepMode::SingleShot,
        };
        let report = ground_state_sweep(&h, &psi, &taus, a.degree, mode, &opts)?;
        let mut points = report.points.clone();
        if let SweepMode::SingleShot = mode {
            points.insert(
                0,
                apps::GroundStatePoint { tau: 0.0, energy: psi.expectation(&h)?, success_prob: 1.0, gates: 0, two_qubit_gates: 0, fit_deviation: 0.0, residual: 0.0 },
            );
        }
        let last = points.last().unwrap();
        summary.insert("final_energy".into(), json!(last.energy));
        summary.insert("final_success_prob".into(), json!(last.success_prob));
        summary.insert("gamma".into(), json!(report.gamma));
        summary.insert("e0_lower".into(), json!(report.e0_lower));
        summary.insert("emax_upper".into(), json!(report.emax_upper));
        summary.insert("fit_deviation".into(), json!(last.fit_deviation));
        summary.insert("phase_residual".into(), json!(last.residual));
        summary.insert("gates".into(), json!(last.gates));
        summary.insert("two_qubit_gates".into(), json!(last.two_qubit_gates));
        finish_state(&report.final_state, a, &mut summary)?;
        points
            .iter()
            .map(|p| {
                let exact = match &eig {
                    Some(e) => Some(oracle::energy(e, &oracle::exact_ite_with(e, &psi, p.tau, e.values[0])?.0)),
                    None => None,
                };
                let err = e0.map(|e| p.energy - e);
                Ok(vec![num(p.tau), num(p.energy), opt(exact), opt(err), num(p.success_prob), p.gates.to_string(), p.two_qubit_gates.to_string()])
            })
            .collect::<Res<Vec<_>>>()?
    };
    write_csv(&with_ext(&pre, "csv"), &header, &rows)?;
    write_json(&with_ext(&pre, "json"), Value::Object(summary), config)
}

pub fn gibbs(a: &GibbsArgs, config: Value) -> Res<()> {
    validate_qetu(&a.qetu)?;
    validate_degree(a.degree)?;
    check(a.trotter >= 1, || "trotter must be at least 1".into())?;
    check(!a.beta.is_empty() && a.beta.iter().all(|b| *b >= 0.0 && b.is_finite()), || "beta values must be non-negative".into())?;
    let models: Vec<(Option<f64>, PauliSum<f64>)> = match a.model {
        ModelKind::Tfim => {
            check(!a.g.is_empty() && a.g.iter().all(|g| g.is_finite()), || "g values must be finite".into())?;
            a.g.iter().map(|&g| Ok((Some(g), build_tfim(a.sites, a.j, g)?))).collect::<Res<_>>()?
        }
        ModelKind::File => vec![(None, read_hamiltonian(&a.hamiltonian_file)?)],
        ModelKind::Hubbard => return Err(Failure::config("gibbs supports --model tfim or file")),
    };
    if let Some((_, h)) = models.first() {
        dump_hamiltonian(h, &a.dump_hamiltonian)?;
        check(2 * h.n_qubits() < qetu_core::sim::MAX_STATE_QUBITS, || "system too large for the purified register".into())?;
    }
    let opts = qetu_options(&a.qetu, a.trotter);
    let jobs: Vec<(f64, Option<f64>, &PauliSum<f64>)> = a.beta.iter().flat_map(|&b| models.iter().map(move |(g, h)| (b, *g, h))).collect();
    let results = jobs
        .par_iter()
        .map(|&(beta, g, h)| {
            let r = gibbs_prepare(h, beta, a.degree, &opts)?;
            let ex = if h.n_qubits() <= ORACLE_QUBITS { Some(oracle::exact_gibbs(h, beta)?) } else { None };
            Ok((beta, g, r, ex))
        })
        .collect::<Result<Vec<_>, qetu_core::QetuError>>()?;
    let mut rows = vec![];
    let (mut worst_z, mut worst_td, mut worst_m): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut gates = 0;
    for (beta, g, r, ex) in &results {
        let td = ex.as_ref().map(|e| oracle::trace_distance(&r.rho_sys, &e.rho));
        if let Some(e) = ex {
            worst_z = worst_z.max((r.partition / e.z - 1.0).abs());
            worst_td = worst_td.max(td.unwrap());
            worst_m = worst_m.max((r.magnetization - e.magnetization).abs()).max((r.abs_magnetization - e.abs_magnetization).abs());
        }
        gates = r.gates;
        rows.push(vec![
            num(*beta),
            opt(*g),
            num(r.success_prob),
            num(r.z_estimate),
            num(r.partition),
            opt(ex.as_ref().map(|e| e.z)),
            num(r.magnetization),
            opt(ex.as_ref().map(|e| e.magnetization)),
            num(r.abs_magnetization),
            opt(ex.as_ref().map(|e| e.abs_magnetization)),
            opt(td),
            r.gates.to_string(),
            r.two_qubit_gates.to_string(),
        ]);
    }
    let pre = prefix(&a.output, "gibbs");
    let header = [
        "beta",
        "g",
        "success_prob",
        "z_estimate",
        "partition",
        "exact_partition",
        "magnetization",
        "exact_magnetization",
        "abs_magnetization",
        "exact_abs_magnetization",
        "trace_distance",
        "gates",
        "two_qubit_gates",
    ];
    write_csv(&with_ext(&pre, "csv"), &header, &rows)?;
    let summary = json!({
        "points": rows.len(),
        "gates": gates,
        "max_partition_rel_error": worst_z,
        "max_trace_distance": worst_td,
        "max_magnetization_error": worst_m,
    });
    write_json(&with_ext(&pre, "json"), summary, config)
}

fn step_method(s: StepArg) -> StepMethod {
    match s {
        StepArg::Circuit => StepMethod::Circuit,
        StepArg::Exact => StepMethod::Exact,
    }
}

pub fn lindblad(a: &LindbladArgs, config: Value) -> Res<()> {
    validate_qetu(&a.qetu)?;
    validate_degree(a.degree)?;
    check(a.gamma >= 0.0 && a.gamma.is_finite(), || "gamma must be non-negative".into())?;
    check(a.delta.is_finite() && a.omega.is_finite(), || "delta and omega must be finite".into())?;
    check(a.dt > 0.0 && a.dt.is_finite(), || "dt must be positive".into())?;
    check(a.steps >= 1, || "steps must be at least 1".into())?;
    check(a.trotter >= 1, || "trotter must be at least 1".into())?;
    check(a.initial < 2, || "initial must be 0 or 1".into())?;
    let model = two_level_damping(a.delta, a.omega, a.gamma)?;
    let opts = LindbladOptions {
        qetu: qetu_options(&a.qetu, a.trotter),
        unitary: step_method(a.unitary),
        nonunitary: step_method(a.nonunitary),
        initial_index: a.initial,
    };
    let run = lindblad_propagate(&model, a.dt, a.steps, a.degree, &opts)?;
    let mut rho0 = CMat::zeros(2, 2);
    rho0.set(a.initial, a.initial, Complex64::new(1.0, 0.0));
    let exact = oracle::exact_lindblad_from(&model, &rho0, a.dt, a.steps)?;
    let mut worst: f64 = 0.0;
    let rows: Vec<Vec<String>> = (0..=a.steps)
        .map(|k| {
            let p = &run.populations[k];
            let e = &exact[k].1;
            worst = worst.max((p[0] - e[0]).abs()).max((p[1] - e[1]).abs());
            vec![k.to_string(), num(run.times[k]), num(p[0]), num(p[1]), num(e[0]), num(e[1]), num(run.cumulative_success[k])]
        })
        .collect();
    let pre = prefix(&a.output, "lindblad");
    write_csv(&with_ext(&pre, "csv"), &["step", "time", "pop_0", "pop_1", "exact_pop_0", "exact_pop_1", "cumulative_success"], &rows)?;
    let summary = json!({
        "max_population_deviation": worst,
        "final_cumulative_success": run.cumulative_success.last(),
        "per_step_gates": run.per_step_gates,
        "per_step_two_qubit_gates": run.per_step_two_qubit,
        "jump_operator": PauliString::single(1, 0, qetu_core::Pauli::X).to_string() + " - iY (scaled by sqrt(gamma))",
    });
    write_json(&with_ext(&pre, "json"), summary, config)
}
