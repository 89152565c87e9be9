//! Statevector emulator.

mod circuit;
mod state;
mod trotter;

pub use circuit::{apply_circuit, apply_in_place, Circuit, Gate, GateCounts};
pub use state::{MeasurementRecord, StateVector, MAX_STATE_QUBITS};
pub use trotter::{
    controlled_fwd_rev, controlled_single, palindromic_sequence, trotter_circuit, trotter_circuit_order, Backend,
    ExactBlocks, Orientation, TrotterOrder,
};

use crate::error::Result;
use crate::pauli::PauliSum;
use crate::scalar::Real;

/// `<s|obs|s>`.
pub fn expectation<T: Real>(s: &StateVector<T>, obs: &PauliSum<T>) -> Result<T> {
    s.expectation(obs)
}

/// Projects `qubit` onto `outcome`; returns the renormalized state and the outcome probability.
pub fn postselect<T: Real>(s: &StateVector<T>, qubit: usize, outcome: u8) -> Result<(StateVector<T>, T)> {
    s.postselect(qubit, outcome)
}

/// Measures `qubit` with a seeded draw and collapses the state.
pub fn measure<T: Real>(s: &StateVector<T>, qubit: usize, seed: u64) -> Result<(StateVector<T>, MeasurementRecord)> {
    use rand::{Rng, SeedableRng};
    let p1 = s.probability(qubit, 1).as_f64();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let outcome = u8::from(rng.gen::<f64>() < p1);
    let (post, p) = s.postselect(qubit, outcome)?;
    Ok((post, MeasurementRecord { qubit, outcome, probability: p.as_f64() }))
}
