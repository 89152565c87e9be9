//! Spectral bounds and the affine embedding of a Hamiltonian into `[eta, pi/2 - eta]`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{QetuError, Result};
use crate::oracle;
use crate::pauli::PauliSum;
use crate::scalar::{c_re, Real, C};
use crate::sim::StateVector;

/// Default margin constant.
pub const DEFAULT_ETA: f64 = 0.05;

/// Largest register for the Gershgorin row scan.
pub const MAX_GERSHGORIN_QUBITS: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMethod {
    NormSum,
    Gershgorin,
    ReferenceState,
    Exact,
}

impl std::str::FromStr for BoundsMethod {
    type Err = QetuError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "norm_sum" | "norm-sum" => Ok(Self::NormSum),
            "gershgorin" => Ok(Self::Gershgorin),
            "reference_state" | "reference" => Ok(Self::ReferenceState),
            "exact" => Ok(Self::Exact),
            other => Err(QetuError::Parse(format!("unknown bounds method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBounds<T: Real = f64> {
    pub e0_lower: T,
    pub emax_upper: T,
    pub method: BoundsMethod,
}

impl<T: Real> SpectralBounds<T> {
    pub fn new(e0_lower: T, emax_upper: T, method: BoundsMethod) -> Result<Self> {
        if !(e0_lower <= emax_upper) {
            return Err(QetuError::InvalidInput(format!("lower bound {e0_lower} exceeds upper bound {emax_upper}")));
        }
        Ok(Self { e0_lower, emax_upper, method })
    }

    pub fn width(&self) -> T {
        self.emax_upper - self.e0_lower
    }
}

fn require_hermitian<T: Real>(h: &PauliSum<T>) -> Result<()> {
    if h.is_hermitian() {
        Ok(())
    } else {
        Err(QetuError::InvalidInput("Hamiltonian is not Hermitian".into()))
    }
}

/// `±sum |a_k|`.
pub fn bounds_norm_sum<T: Real>(h: &PauliSum<T>) -> Result<SpectralBounds<T>> {
    require_hermitian(h)?;
    let s = h.one_norm();
    SpectralBounds::new(-s, s, BoundsMethod::NormSum)
}

/// Gershgorin discs over the rows of `H`, scanned through the Pauli action without storing the matrix.
pub fn bounds_gershgorin<T: Real>(h: &PauliSum<T>) -> Result<SpectralBounds<T>> {
    require_hermitian(h)?;
    let n = h.n_qubits();
    if n > MAX_GERSHGORIN_QUBITS {
        return Err(QetuError::Resource(format!("{n} qubits exceed the Gershgorin limit of {MAX_GERSHGORIN_QUBITS}")));
    }
    let terms: Vec<_> = h.terms().map(|(p, a)| (*p, *a)).collect();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut row: HashMap<u64, C<T>> = HashMap::new();
    for b in 0..1u64 << n {
        row.clear();
        // row b of H: H[b][c] = sum_k a_k <b|P_k|c>; P_k maps c = b ^ x to b
        for (p, a) in &terms {
            let col = b ^ p.x_mask();
            let (ph, _) = p.apply_basis::<T>(col);
            *row.entry(col).or_insert(c_re(T::zero())) += ph * a;
        }
        let diag = row.get(&b).map_or(T::zero(), |d| d.re);
        let radius: T = row.iter().filter(|(k, _)| **k != b).map(|(_, v)| v.norm()).sum();
        lo = lo.min(diag - radius);
        hi = hi.max(diag + radius);
    }
    SpectralBounds::new(lo, hi, BoundsMethod::Gershgorin)
}

/// `<psi0|H|psi0>`, an upper bound on the ground energy (not a lower bound).
pub fn bounds_reference<T: Real>(h: &PauliSum<T>, psi0: &StateVector<T>) -> Result<T> {
    if psi0.n_qubits() != h.n_qubits() {
        return Err(QetuError::InvalidInput(format!(
            "state on {} qubits, Hamiltonian on {}",
            psi0.n_qubits(),
            h.n_qubits()
        )));
    }
    psi0.expectation(h)
}

/// Exact extremal eigenvalues from dense diagonalization.
pub fn bounds_exact<T: Real>(h: &PauliSum<T>) -> Result<SpectralBounds<T>> {
    require_hermitian(h)?;
    let e = oracle::eigh(&h.cast::<f64>())?;
    SpectralBounds::new(T::lit(e.values[0]), T::lit(*e.values.last().unwrap()), BoundsMethod::Exact)
}

/// Bounds by method; the reference-state method keeps the norm-sum upper bound and uses
/// `<psi0|H|psi0>` only as a diagnostic, so it falls back to norm-sum bounds here.
pub fn bounds_by<T: Real>(h: &PauliSum<T>, method: BoundsMethod) -> Result<SpectralBounds<T>> {
    match method {
        BoundsMethod::NormSum | BoundsMethod::ReferenceState => bounds_norm_sum(h),
        BoundsMethod::Gershgorin => bounds_gershgorin(h),
        BoundsMethod::Exact => bounds_exact(h),
    }
}

/// Hamiltonian with its embedding parameters: eigenvalue `E` maps to `E t + sigma`.
#[derive(Clone, Debug)]
pub struct ScaledHamiltonian<T: Real = f64> {
    pub base: PauliSum<T>,
    pub t: T,
    pub sigma: T,
    pub eta: T,
    pub bounds: SpectralBounds<T>,
}

impl<T: Real> ScaledHamiltonian<T> {
    pub fn scale_energy(&self, e: T) -> T {
        e * self.t + self.sigma
    }

    pub fn unscale_energy(&self, x: T) -> T {
        (x - self.sigma) / self.t
    }

    pub fn n_qubits(&self) -> usize {
        self.base.n_qubits()
    }

    pub fn cast<U: Real>(&self) -> ScaledHamiltonian<U> {
        ScaledHamiltonian {
            base: self.base.cast(),
            t: U::lit(self.t.as_f64()),
            sigma: U::lit(self.sigma.as_f64()),
            eta: U::lit(self.eta.as_f64()),
            bounds: SpectralBounds {
                e0_lower: U::lit(self.bounds.e0_lower.as_f64()),
                emax_upper: U::lit(self.bounds.emax_upper.as_f64()),
                method: self.bounds.method,
            },
        }
    }
}

/// `t = (pi/2 - 2 eta)/(Emax - E0)`, `sigma = eta - E0 t`.
pub fn make_scaled<T: Real>(h: &PauliSum<T>, bounds: SpectralBounds<T>, eta: T) -> Result<ScaledHamiltonian<T>> {
    require_hermitian(h)?;
    if !(eta > T::zero() && eta < T::FRAC_PI_4()) {
        return Err(QetuError::InvalidInput(format!("eta = {eta} must lie in (0, pi/4)")));
    }
    let width = bounds.width();
    if !(width > T::zero()) {
        return Err(QetuError::InvalidInput("degenerate spectral bounds".into()));
    }
    let t = (T::FRAC_PI_2() - eta - eta) / width;
    let sigma = eta - bounds.e0_lower * t;
    Ok(ScaledHamiltonian { base: h.clone(), t, sigma, eta, bounds })
}
