//! Ground-state preparation, Gibbs states and Lindblad time stepping.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{self, heaviside_target, ite_target, synthesize, Direction, TargetFunction};
use crate::error::{QetuError, Result};
use crate::linalg::CMat;
use crate::oracle;
use crate::pauli::{build_lindbladian, hermitian_split, LindbladModel, PauliSum};
use crate::qetu::{fragment_ite, PreparedQetu, QetuPlan, Variant};
use crate::scalar::{from_c64, Real};
use crate::sim::{apply_in_place, trotter_circuit, Backend, Circuit, Gate, GateCounts, StateVector};
use crate::spectrum::{bounds_by, make_scaled, BoundsMethod, ScaledHamiltonian, DEFAULT_ETA};

/// Knobs shared by every QET-U driver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QetuOptions {
    pub eta: f64,
    pub bounds: BoundsMethod,
    pub variant: Variant,
    pub backend: Backend,
    pub trotter_steps: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for QetuOptions {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            bounds: BoundsMethod::Exact,
            variant: Variant::FwdRev,
            backend: Backend::Fast,
            trotter_steps: 25,
            tol: approx::DEFAULT_TOL,
            max_iter: approx::DEFAULT_MAX_ITER,
        }
    }
}

/// Scaled Hamiltonian with the configured bounds method.
pub fn scale_with<T: Real>(h: &PauliSum<T>, opts: &QetuOptions) -> Result<ScaledHamiltonian<T>> {
    let b = bounds_by(h, opts.bounds)?;
    make_scaled(h, b, T::lit(opts.eta))
}

fn plan_for<T: Real>(scaled: &ScaledHamiltonian<T>, target: &TargetFunction<T>, degree: usize, opts: &QetuOptions) -> Result<(QetuPlan<T>, approx::ChebyshevExpansion<T>)> {
    let (cheb, phases) = synthesize(target, degree, T::lit(opts.tol), opts.max_iter)?;
    let plan = QetuPlan::new(scaled.clone(), phases, opts.trotter_steps)
        .with_variant(opts.variant)
        .with_backend(opts.backend);
    Ok((plan, cheb))
}

/// Basis index of the Neel determinant (up on odd sites, down on even sites) of a Hubbard
/// chain in the spin-block ordering; at half filling it is the mean-field reference state.
pub fn hubbard_neel_index(sites: usize) -> usize {
    let mut idx = 0usize;
    for i in 0..sites {
        if i % 2 == 1 {
            idx |= 1 << i;
        } else {
            idx |= 1 << (sites + i);
        }
    }
    idx
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    SingleShot,
    Fragmented { delta_tau: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundStatePoint {
    pub tau: f64,
    pub energy: f64,
    pub success_prob: f64,
    pub gates: usize,
    pub two_qubit_gates: usize,
    pub fit_deviation: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroundStateReport<T: Real = f64> {
    pub points: Vec<GroundStatePoint>,
    /// `|<psi0|Phi_0>|` (weight on the lowest eigenspace), when the oracle can afford it.
    pub gamma: Option<f64>,
    pub mode: SweepMode,
    pub degree: usize,
    pub e0_lower: f64,
    pub emax_upper: f64,
    /// Normalized state at the largest `tau`.
    #[serde(skip)]
    pub final_state: StateVector<T>,
}

impl<T: Real> GroundStateReport<T> {
    pub fn taus(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.tau).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energy).collect()
    }

    pub fn success_probs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.success_prob).collect()
    }
}

/// Overlap of `psi0` with the lowest eigenspace of `h` (dense, up to 12 qubits).
pub fn ground_overlap<T: Real>(h: &PauliSum<T>, psi0: &StateVector<T>) -> Option<f64> {
    if h.n_qubits() > 12 {
        return None;
    }
    let e = oracle::eigh(&h.cast::<f64>()).ok()?;
    let a = e.components(psi0.cast::<f64>().amplitudes());
    let e0 = e.values[0];
    Some(a.iter().zip(&e.values).filter(|(_, x)| **x - e0 < 1e-8).map(|(a, _)| a.norm_sqr()).sum::<f64>().sqrt())
}

/// Energy and success probability of normalized imaginary-time evolution for each `tau`
/// (single shot), or after each fragment of size `delta_tau` up to `max(taus)` (fragmented).
pub fn ground_state_sweep<T: Real>(h: &PauliSum<T>, psi0: &StateVector<T>, taus: &[f64], degree: usize, mode: SweepMode, opts: &QetuOptions) -> Result<GroundStateReport<T>> {
    if psi0.n_qubits() != h.n_qubits() {
        return Err(QetuError::InvalidInput("initial state and Hamiltonian sizes differ".into()));
    }
    if taus.iter().any(|t| !(*t >= 0.0)) {
        return Err(QetuError::InvalidInput("tau values must be non-negative".into()));
    }
    let scaled = scale_with(h, opts)?;
    let (points, final_state) = match mode {
        SweepMode::SingleShot => {
            let runs = taus
                .par_iter()
                .map(|&tau| {
                    let target = ite_target(&scaled, T::lit(tau), Direction::Forward)?;
                    let (plan, cheb) = plan_for(&scaled, &target, degree, opts)?;
                    let r = PreparedQetu::new(&plan)?.apply(psi0)?;
                    let point = GroundStatePoint {
                        tau,
                        energy: r.state.expectation(h)?.as_f64(),
                        success_prob: r.success_prob.as_f64(),
                        gates: r.gate_count,
                        two_qubit_gates: r.two_qubit_count,
                        fit_deviation: cheb.max_deviation.as_f64(),
                        residual: plan.phases.residual.as_f64(),
                    };
                    Ok((point, r.state))
                })
                .collect::<Result<Vec<_>>>()?;
            let last = taus.iter().enumerate().fold(None, |best: Option<(usize, f64)>, (i, t)| match best {
                Some((_, bt)) if bt >= *t => best,
                _ => Some((i, *t)),
            });
            let final_state = last.map(|(i, _)| runs[i].1.clone()).unwrap_or_else(|| psi0.clone());
            (runs.into_iter().map(|(p, _)| p).collect(), final_state)
        }
        SweepMode::Fragmented { delta_tau } => {
            if !(delta_tau > 0.0) {
                return Err(QetuError::InvalidInput("fragment size must be positive".into()));
            }
            let tau_max = taus.iter().cloned().fold(0.0, f64::max);
            let n_frag = ((tau_max / delta_tau).round() as usize).max(1);
            let target = ite_target(&scaled, T::lit(delta_tau), Direction::Forward)?;
            let (template, cheb) = plan_for(&scaled, &target, degree, opts)?;
            let run = fragment_ite(&template, n_frag, T::lit(delta_tau), psi0, T::lit(opts.tol), opts.max_iter)?;
            let mut pts = vec![GroundStatePoint {
                tau: 0.0,
                energy: psi0.expectation(h)?.as_f64(),
                success_prob: 1.0,
                gates: 0,
                two_qubit_gates: 0,
                fit_deviation: cheb.max_deviation.as_f64(),
                residual: run.phases.residual.as_f64(),
            }];
            for (k, (f, cum)) in run.fragments.iter().zip(&run.cumulative_success).enumerate() {
                pts.push(GroundStatePoint {
                    tau: delta_tau * (k + 1) as f64,
                    energy: f.state.expectation(h)?.as_f64(),
                    success_prob: cum.as_f64(),
                    gates: f.gate_count * (k + 1),
                    two_qubit_gates: f.two_qubit_count * (k + 1),
                    fit_deviation: cheb.max_deviation.as_f64(),
                    residual: run.phases.residual.as_f64(),
                });
            }
            let final_state = run.fragments.last().map(|f| f.state.clone()).unwrap_or_else(|| psi0.clone());
            (pts, final_state)
        }
    };
    Ok(GroundStateReport {
        points,
        gamma: ground_overlap(h, psi0),
        mode,
        degree,
        e0_lower: scaled.bounds.e0_lower.as_f64(),
        emax_upper: scaled.bounds.emax_upper.as_f64(),
        final_state,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FilterResult {
    pub energy: f64,
    pub success_prob: f64,
    pub gates: usize,
    pub two_qubit_gates: usize,
    pub fit_deviation: f64,
    pub mu_scaled: f64,
    pub smoothing_scaled: f64,
}

/// Smoothed step filter at energy `mu` with transition width `width` (both unscaled).
pub fn eigenstate_filter<T: Real>(h: &PauliSum<T>, psi0: &StateVector<T>, mu: f64, width: f64, degree: usize, opts: &QetuOptions) -> Result<(FilterResult, StateVector<T>)> {
    let scaled = scale_with(h, opts)?;
    let t = scaled.t.as_f64();
    let mu_s = mu * t + scaled.sigma.as_f64();
    let target = heaviside_target(&scaled, T::lit(mu_s), T::lit(width * t))?;
    let (plan, cheb) = plan_for(&scaled, &target, degree, opts)?;
    let r = PreparedQetu::new(&plan)?.apply(psi0)?;
    Ok((
        FilterResult {
            energy: r.state.expectation(h)?.as_f64(),
            success_prob: r.success_prob.as_f64(),
            gates: r.gate_count,
            two_qubit_gates: r.two_qubit_count,
            fit_deviation: cheb.max_deviation.as_f64(),
            mu_scaled: mu_s,
            smoothing_scaled: width * t,
        },
        r.state,
    ))
}

/// H on the first `n` qubits and CNOT from qubit `i` to qubit `n + i`.
pub fn prepare_max_entangled<T: Real>(n: usize) -> Result<Circuit<T>> {
    if n == 0 {
        return Err(QetuError::InvalidInput("register must have at least one qubit".into()));
    }
    let mut c = Circuit::new(2 * n);
    for i in 0..n {
        c.push(Gate::H(i))?;
    }
    for i in 0..n {
        c.push(Gate::Cnot { control: i, target: n + i })?;
    }
    Ok(c)
}

/// Reduced density matrix of the low `n_sys` qubits.
pub fn reduced_density<T: Real>(s: &StateVector<T>, n_sys: usize) -> CMat<T> {
    let dim = 1usize << n_sys;
    let envs = s.amplitudes().len() / dim;
    let a = s.amplitudes();
    let mut rho = CMat::zeros(dim, dim);
    for e in 0..envs {
        let off = e * dim;
        for i in 0..dim {
            let ai = a[off + i];
            if ai.norm_sqr() == T::zero() {
                continue;
            }
            for j in 0..dim {
                let v = rho.get(i, j) + ai * a[off + j].conj();
                rho.set(i, j, v);
            }
        }
    }
    rho
}

fn z_sum(index: usize, n: usize) -> i64 {
    (0..n).map(|q| if index >> q & 1 == 0 { 1 } else { -1 }).sum()
}

/// `Tr[rho sum_i Z_i]`.
pub fn magnetization<T: Real>(rho: &CMat<T>, n: usize) -> f64 {
    (0..rho.rows).map(|i| rho.get(i, i).re.as_f64() * z_sum(i, n) as f64).sum()
}

/// `sum_b rho_bb |sum_i z_i(b)|`, the mean magnitude of the magnetization.
pub fn abs_magnetization<T: Real>(rho: &CMat<T>, n: usize) -> f64 {
    (0..rho.rows).map(|i| rho.get(i, i).re.as_f64() * z_sum(i, n).abs() as f64).sum()
}

#[derive(Clone, Debug)]
pub struct GibbsResult<T: Real = f64> {
    pub beta: f64,
    pub rho_sys: CMat<T>,
    /// Raw `2^n * success_prob`.
    pub z_estimate: f64,
    pub success_prob: f64,
    /// `c` with `P(E) ~ c exp(-beta E / 2)`: fit headroom times the target normalization.
    pub normalization: f64,
    /// `2^n * success_prob / c^2`, the estimate of `Tr exp(-beta H)`.
    pub partition: f64,
    pub magnetization: f64,
    pub abs_magnetization: f64,
    pub gates: usize,
    pub two_qubit_gates: usize,
}

/// Purified Gibbs state: imaginary-time evolution by `beta/2` on the system half of a maximally
/// entangled system/environment pair, environment traced out exactly.
pub fn gibbs_prepare<T: Real>(h_sys: &PauliSum<T>, beta: f64, degree: usize, opts: &QetuOptions) -> Result<GibbsResult<T>> {
    if !(beta >= 0.0) {
        return Err(QetuError::InvalidInput("beta must be non-negative".into()));
    }
    let n = h_sys.n_qubits();
    let h2 = h_sys.embed(crate::pauli::Register::B, 2 * n)?;
    let b = bounds_by(h_sys, opts.bounds)?;
    let scaled = make_scaled(&h2, b, T::lit(opts.eta))?;
    let target = ite_target(&scaled, T::lit(beta / 2.0), Direction::Forward)?;
    let (plan, cheb) = plan_for(&scaled, &target, degree, opts)?;
    let prep = prepare_max_entangled::<T>(n)?;
    let mut psi = StateVector::zero(2 * n);
    apply_in_place(&prep, &mut psi)?;
    let prepared = PreparedQetu::new(&plan)?;
    let r = prepared.apply(&psi)?;
    let rho = reduced_density(&r.state, n);
    let c = cheb.scale.as_f64() * target.normalization().unwrap().as_f64();
    let success = r.success_prob.as_f64();
    let dim = (1u64 << n) as f64;
    let counts = prepared.counts() + prep.counts();
    Ok(GibbsResult {
        beta,
        magnetization: magnetization(&rho, n),
        abs_magnetization: abs_magnetization(&rho, n),
        rho_sys: rho,
        z_estimate: dim * success,
        success_prob: success,
        normalization: c,
        partition: dim * success / (c * c),
        gates: counts.total,
        two_qubit_gates: counts.two_qubit,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMethod {
    /// Product formula / QET-U circuits.
    Circuit,
    /// Dense exact propagators.
    Exact,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LindbladOptions {
    pub qetu: QetuOptions,
    pub unitary: StepMethod,
    pub nonunitary: StepMethod,
    /// System basis state `i`; the run starts from `|i><i|`.
    pub initial_index: usize,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self {
            qetu: QetuOptions { trotter_steps: 2, ..QetuOptions::default() },
            unitary: StepMethod::Circuit,
            nonunitary: StepMethod::Circuit,
            initial_index: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LindbladRun {
    pub dt: f64,
    pub n_steps: usize,
    pub times: Vec<f64>,
    /// Diagonal of the trace-normalized density matrix at each time (index = system basis state).
    pub populations: Vec<Vec<f64>>,
    /// Product of the per-step success probabilities (1 at t = 0).
    pub cumulative_success: Vec<f64>,
    pub per_step_gates: usize,
    pub per_step_two_qubit: usize,
}

/// Strang-split time stepping of the vectorized density operator:
/// `exp(i H1 dt/2)`, then `exp((H2 - Emax) dt)` via reverse imaginary time, then `exp(i H1 dt/2)`.
pub fn lindblad_propagate<T: Real>(model: &LindbladModel<T>, dt: f64, n_steps: usize, degree: usize, opts: &LindbladOptions) -> Result<LindbladRun> {
    let n = model.n_qubits();
    if 2 * n > 12 {
        return Err(QetuError::Resource("vectorized register exceeds 12 qubits".into()));
    }
    if !(dt > 0.0) {
        return Err(QetuError::InvalidInput("time step must be positive".into()));
    }
    let dim = 1usize << n;
    if opts.initial_index >= dim {
        return Err(QetuError::InvalidInput("initial basis index outside the register".into()));
    }
    let l = build_lindbladian(model)?;
    let (h1, h2) = hermitian_split(&l);
    let nv = 2 * n;

    // unitary half step exp(i H1 dt/2) = exp(-i (-H1) dt/2)
    let minus_h1 = -&h1;
    let mut counts = GateCounts::default();
    let unitary = match opts.unitary {
        StepMethod::Circuit => {
            let c = trotter_circuit(&minus_h1, T::lit(dt / 2.0), opts.qetu.trotter_steps.max(1))?;
            let c = c.compile();
            counts = counts + c.counts() * 2;
            Step::Circuit(c)
        }
        StepMethod::Exact => {
            let u = oracle::unitary_evolution(&minus_h1.cast::<f64>(), dt / 2.0)?;
            Step::Dense(u.map(from_c64::<T>))
        }
    };
    let half_step = |psi: &mut StateVector<T>| -> Result<()> {
        match &unitary {
            Step::Circuit(c) => apply_in_place(c, psi),
            Step::Dense(m) => {
                *psi = StateVector::from_amplitudes(nv, m.matvec(psi.amplitudes()))?;
                Ok(())
            }
        }
    };

    enum NonUnitary<T: Real> {
        Qetu(PreparedQetu<T>),
        Exact(CMat<T>),
    }
    let nonunitary = match opts.nonunitary {
        StepMethod::Circuit => {
            let scaled = scale_with(&h2, &opts.qetu)?;
            let target = ite_target(&scaled, T::lit(dt), Direction::Reverse)?;
            let (plan, _) = plan_for(&scaled, &target, degree, &opts.qetu)?;
            let p = PreparedQetu::new(&plan)?;
            counts = counts + p.counts();
            NonUnitary::Qetu(p)
        }
        StepMethod::Exact => {
            let e = oracle::eigh(&h2.cast::<f64>())?;
            let emax = *e.values.last().unwrap();
            let m = e.function_matrix(|x| num_complex::Complex64::new(((x - emax) * dt).exp(), 0.0));
            NonUnitary::Exact(CMat::from_nalgebra(&m).map(from_c64::<T>))
        }
    };

    let mut psi = StateVector::<T>::basis(nv, opts.initial_index * dim + opts.initial_index);
    let read = |s: &StateVector<T>| -> Result<Vec<f64>> {
        let a = s.amplitudes();
        let diag: Vec<_> = (0..dim).map(|i| a[i * dim + i]).collect();
        let trace: f64 = diag.iter().map(|z| z.re.as_f64()).sum();
        if !(trace > 0.0) {
            return Err(QetuError::NumericalBreakdown(format!("non-positive trace {trace:.3e}")));
        }
        let mags: Vec<f64> = diag.iter().map(|z| z.norm().as_f64()).collect();
        let tot: f64 = mags.iter().sum();
        Ok(mags.iter().map(|m| m / tot).collect())
    };
    let mut times = vec![0.0];
    let mut pops = vec![read(&psi)?];
    let mut cumulative = vec![1.0];
    let mut acc = 1.0;
    for step in 1..=n_steps {
        half_step(&mut psi)?;
        let p = match &nonunitary {
            NonUnitary::Qetu(q) => {
                let r = q.apply(&psi)?;
                psi = r.state;
                r.success_prob.as_f64()
            }
            NonUnitary::Exact(m) => {
                let v = m.matvec(psi.amplitudes());
                psi = StateVector::from_amplitudes(nv, v)?;
                psi.normalize()?.as_f64()
            }
        };
        half_step(&mut psi)?;
        acc *= p;
        times.push(step as f64 * dt);
        pops.push(read(&psi)?);
        cumulative.push(acc);
    }
    Ok(LindbladRun {
        dt,
        n_steps,
        times,
        populations: pops,
        cumulative_success: cumulative,
        per_step_gates: counts.total,
        per_step_two_qubit: counts.two_qubit,
    })
}

enum Step<T: Real> {
    Circuit(Circuit<T>),
    Dense(CMat<T>),
}
