//! Statevector storage, measurement, sampling and binary dumps.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QetuError, Result};
use crate::pauli::PauliSum;
use crate::scalar::{c, c_re, Real, C};

/// Amplitudes over `n` qubits; basis index bit `q` is qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real = f64> {
    n: usize,
    amps: Vec<C<T>>,
}

/// Outcome of a single-qubit projective measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub outcome: u8,
    pub probability: f64,
}

/// Largest register the emulator will allocate.
pub const MAX_STATE_QUBITS: usize = 26;

impl<T: Real> StateVector<T> {
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        assert!(n <= MAX_STATE_QUBITS, "register of {n} qubits exceeds emulator limit");
        assert!(index < 1 << n, "basis index out of range");
        let mut amps = vec![c_re(T::zero()); 1 << n];
        amps[index] = c_re(T::one());
        Self { n, amps }
    }

    /// Equal superposition of all basis states.
    pub fn uniform(n: usize) -> Self {
        let a = T::one() / T::lit((1u64 << n) as f64).sqrt();
        Self { n, amps: vec![c_re(a); 1 << n] }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C<T>>) -> Result<Self> {
        if n > MAX_STATE_QUBITS || amps.len() != 1 << n {
            return Err(QetuError::InvalidInput(format!(
                "{} amplitudes do not describe {n} qubits",
                amps.len()
            )));
        }
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C<T>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C<T>> {
        self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Normalizes in place and returns the previous squared norm.
    pub fn normalize(&mut self) -> Result<T> {
        let n2 = self.norm_sqr();
        if !(n2 > T::zero()) || !n2.is_finite() {
            return Err(QetuError::NumericalBreakdown("cannot normalize a zero vector".into()));
        }
        let inv = T::one() / n2.sqrt();
        for a in &mut self.amps {
            *a = *a * inv;
        }
        Ok(n2)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C<T> {
        self.amps.iter().zip(&other.amps).fold(c_re(T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    /// `<s|obs|s>`; the imaginary part is discarded after checking it is negligible.
    pub fn expectation(&self, obs: &PauliSum<T>) -> Result<T> {
        if obs.n_qubits() != self.n {
            return Err(QetuError::InvalidInput(format!(
                "observable on {} qubits, state on {}",
                obs.n_qubits(),
                self.n
            )));
        }
        if !obs.is_hermitian() {
            return Err(QetuError::InvalidInput("observable is not Hermitian".into()));
        }
        let hv = obs.apply(&self.amps)?;
        let v = self.amps.iter().zip(&hv).fold(c_re(T::zero()), |acc, (a, b)| acc + a.conj() * b);
        Ok(v.re)
    }

    /// Probability that `qubit` reads `outcome`.
    pub fn probability(&self, qubit: usize, outcome: u8) -> T {
        let bit = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i & bit) != 0) == (outcome == 1))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects `qubit` onto `outcome` and renormalizes. Returns the outcome probability.
    pub fn postselect(&self, qubit: usize, outcome: u8) -> Result<(Self, T)> {
        if qubit >= self.n {
            return Err(QetuError::InvalidInput(format!("qubit {qubit} outside register of {}", self.n)));
        }
        let p = self.probability(qubit, outcome);
        if !(p > T::lit(1e-300)) {
            return Err(QetuError::Projection { probability: p.as_f64() });
        }
        let bit = 1usize << qubit;
        let inv = T::one() / p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if ((i & bit) != 0) == (outcome == 1) { a * inv } else { c_re(T::zero()) })
            .collect();
        Ok((Self { n: self.n, amps }, p))
    }

    /// Drops `qubit`, keeping the amplitudes where it reads `outcome` (no renormalization).
    pub fn remove_qubit(&self, qubit: usize, outcome: u8) -> Result<Self> {
        if qubit >= self.n {
            return Err(QetuError::InvalidInput(format!("qubit {qubit} outside register of {}", self.n)));
        }
        let low = (1usize << qubit) - 1;
        let amps = (0..1usize << (self.n - 1))
            .map(|j| {
                let i = (j & low) | ((j & !low) << 1) | ((outcome as usize) << qubit);
                self.amps[i]
            })
            .collect();
        Ok(Self { n: self.n - 1, amps })
    }

    /// Tensors `|0>` on a new highest qubit.
    pub fn with_ancilla(&self) -> Self {
        let mut amps = self.amps.clone();
        amps.resize(amps.len() * 2, c_re(T::zero()));
        Self { n: self.n + 1, amps }
    }

    /// Multinomial sample of computational-basis outcomes.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<BTreeMap<usize, usize>> {
        if shots == 0 {
            return Err(QetuError::InvalidInput("shots must be at least 1".into()));
        }
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0f64;
        for a in &self.amps {
            acc += a.norm_sqr().as_f64();
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * acc;
            let k = cdf.partition_point(|&x| x <= u).min(cdf.len() - 1);
            *counts.entry(k).or_insert(0) += 1;
        }
        Ok(counts)
    }

    pub fn cast<U: Real>(&self) -> StateVector<U> {
        StateVector { n: self.n, amps: self.amps.iter().map(|a| c(U::lit(a.re.as_f64()), U::lit(a.im.as_f64()))).collect() }
    }

    /// Writes an 8-byte little-endian qubit count followed by `(re, im)` f64 pairs.
    pub fn write_dump(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.as_f64().to_le_bytes())?;
            w.write_all(&a.im.as_f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump(r: &mut impl Read) -> Result<Self> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if n > MAX_STATE_QUBITS {
            return Err(QetuError::Parse(format!("dump claims {n} qubits")));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for _ in 0..1usize << n {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            amps.push(c(T::lit(re), T::lit(im)));
        }
        Ok(Self { n, amps })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_dump(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_dump(&mut std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn postselect_bell() {
        let h = 1.0 / 2f64.sqrt();
        let s = StateVector::from_amplitudes(2, vec![c_re(h), c_re(0.0), c_re(0.0), c_re(h)]).unwrap();
        let (p, prob) = s.postselect(0, 0).unwrap();
        assert!((prob - 0.5).abs() < 1e-12);
        assert!((p.amplitudes()[0].re - 1.0).abs() < 1e-12);
        assert!(s.postselect(0, 1).is_ok());
        let zero = StateVector::<f64>::zero(2);
        assert!(matches!(zero.postselect(1, 1), Err(QetuError::Projection { .. })));
    }

    #[test]
    fn remove_qubit_keeps_order() {
        let amps: Vec<_> = (0..8).map(|i| c_re(i as f64)).collect();
        let s = StateVector::from_amplitudes(3, amps).unwrap();
        let r = s.remove_qubit(1, 1).unwrap();
        let v: Vec<f64> = r.amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(v, [2.0, 3.0, 6.0, 7.0]);
        let top = s.remove_qubit(2, 0).unwrap();
        assert_eq!(top.amplitudes().len(), 4);
        assert_eq!(top.amplitudes()[3].re, 3.0);
    }

    #[test]
    fn sampling_is_seeded() {
        let s = StateVector::<f64>::uniform(2);
        let a = s.sample(1000, 7).unwrap();
        let b = s.sample(1000, 7).unwrap();
        assert_eq!(a, b);
        let basis = StateVector::<f64>::basis(3, 5);
        let counts = basis.sample(50, 1).unwrap();
        assert_eq!(counts.get(&5), Some(&50));
    }

    #[test]
    fn dump_round_trip() {
        let s = StateVector::<f64>::from_amplitudes(1, vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let mut buf = Vec::new();
        s.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 2 * 16);
        let back = StateVector::<f64>::read_dump(&mut buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }
}
