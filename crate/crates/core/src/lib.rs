//! Imaginary-time evolution with quantum eigenvalue transformation of unitaries (QET-U),
//! run on a state-vector emulator and checked against dense linear algebra.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the oracle is `f64` only.

pub mod approx;
pub mod apps;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod pauli;
pub mod qetu;
pub mod scalar;
pub mod sim;
pub mod spectrum;

pub use error::{QetuError, Result};
pub use scalar::{Real, C};

pub use approx::{synthesize, ChebyshevExpansion, Direction, PhaseFactorSet, TargetFunction};
pub use apps::{eigenstate_filter, gibbs_prepare, ground_state_sweep, lindblad_propagate, QetuOptions};
pub use pauli::{Pauli, PauliString, PauliSum, Register};
pub use qetu::{apply_qetu, build_qetu, QetuPlan, QetuResult, Variant};
pub use sim::{Backend, Circuit, Gate, GateCounts, StateVector};
pub use spectrum::{BoundsMethod, ScaledHamiltonian, SpectralBounds};

pub type PauliSum64 = PauliSum<f64>;
pub type PauliSum32 = PauliSum<f32>;
pub type StateVector64 = StateVector<f64>;
pub type StateVector32 = StateVector<f32>;
pub type QetuPlan64 = QetuPlan<f64>;
pub type QetuPlan32 = QetuPlan<f32>;
pub type Circuit64 = Circuit<f64>;
pub type Circuit32 = Circuit<f32>;
