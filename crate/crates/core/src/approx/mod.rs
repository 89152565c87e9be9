//! Target transforms, cosine-series fitting and QSP phase factors.

mod fit;
mod qsp;
mod target;

pub use fit::{eval_cos_series, fit_chebyshev_even, ChebyshevExpansion, BOUND, HEADROOM, VERIFY_POINTS};
pub use qsp::{objective_and_gradient, qsp_eval, solve_phases, solver_nodes, verify_phases, PhaseFactorSet};
pub use target::{heaviside_target, ite_target, tabulated_target, Direction, TargetFunction, TargetKind, STEP_EPS};

use std::io::Write;
use std::path::Path;

use crate::error::{QetuError, Result};
use crate::scalar::Real;

/// Default solver tolerance on the node residual.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default cap on Jacobian evaluations.
pub const DEFAULT_MAX_ITER: usize = 500;

/// Fit and solve in one call.
pub fn synthesize<T: Real>(f: &TargetFunction<T>, degree: usize, tol: T, max_iter: usize) -> Result<(ChebyshevExpansion<T>, PhaseFactorSet<T>)> {
    let cheb = fit_chebyshev_even(f, degree)?;
    let phases = solve_phases(&cheb, tol, max_iter)?;
    Ok((cheb, phases))
}

/// One phase per line in shortest round-trip decimal form.
pub fn write_phase_file<T: Real>(path: &Path, phases: &PhaseFactorSet<T>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for p in &phases.phases {
        writeln!(f, "{:?}", p.as_f64())?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_phase_file<T: Real>(path: &Path) -> Result<PhaseFactorSet<T>> {
    let text = std::fs::read_to_string(path)?;
    let mut phases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| QetuError::Parse(format!("{}:{}: bad phase {line:?}", path.display(), i + 1)))?;
        phases.push(T::lit(v));
    }
    PhaseFactorSet::from_phases(phases)
}
