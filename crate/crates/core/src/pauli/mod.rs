//! Pauli strings and complex-weighted Pauli sums.
//!
//! Qubit 0 is the least-significant bit of a basis index. Strings are written with the
//! highest qubit first, so `"XZ"` means X on qubit 1 and Z on qubit 0 (the Kronecker order).

mod lindblad;
mod models;

pub use lindblad::{build_lindbladian, hermitian_split, LindbladModel};
pub use models::{build_hubbard, build_tfim, hubbard_number_op, jw_annihilation, two_level_damping};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{QetuError, Result};
use crate::linalg::CMat;
use crate::scalar::{c, c_re, Real, C};

/// Coefficients below this modulus are dropped on simplification.
pub const PRUNE_TOL: f64 = 1e-12;

/// Largest register a Pauli string can address.
pub const MAX_QUBITS: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn rank(self) -> u8 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Coefficient-free Pauli string stored as x/z bit masks (Y sets both bits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

/// Which half of a doubled register an operator is placed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Register {
    /// High qubits.
    A,
    /// Low qubits.
    B,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "register too large");
        Self { n, x: 0, z: 0 }
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= MAX_QUBITS, "register too large");
        let m = mask(n);
        Self { n, x: x & m, z: z & m }
    }

    /// Single-qubit operator `p` on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, q: usize) -> Pauli {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} outside register of {}", self.n);
        let bit = 1u64 << q;
        self.x &= !bit;
        self.z &= !bit;
        match p {
            Pauli::I => {}
            Pauli::X => self.x |= bit,
            Pauli::Y => {
                self.x |= bit;
                self.z |= bit
            }
            Pauli::Z => self.z |= bit,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Action on a basis state: `P|b> = phase |b'>`.
    #[inline]
    pub fn apply_basis<T: Real>(&self, b: u64) -> (C<T>, u64) {
        let neg = (b & self.z).count_ones() & 1 == 1;
        let ph = i_pow::<T>(self.y_count());
        (if neg { -ph } else { ph }, b ^ self.x)
    }

    /// Product `self * other` as `(phase, string)`.
    pub fn mul(&self, other: &Self) -> (C<f64>, Self) {
        assert_eq!(self.n, other.n, "register mismatch");
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let y3 = (x & z).count_ones() as i64;
        let sign = (self.z & other.x).count_ones() & 1;
        let e = (self.y_count() as i64 + other.y_count() as i64 - y3).rem_euclid(4) as u32;
        let mut ph = i_pow::<f64>(e);
        if sign == 1 {
            ph = -ph;
        }
        (ph, Self { n: self.n, x, z })
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Places the string on register `reg` of a `total`-qubit register.
    pub fn embed(&self, reg: Register, total: usize) -> Result<Self> {
        if self.n > total || total > MAX_QUBITS {
            return Err(QetuError::InvalidModel(format!(
                "cannot embed {} qubits into {total}",
                self.n
            )));
        }
        let shift = match reg {
            Register::A => total - self.n,
            Register::B => 0,
        };
        Ok(Self { n: total, x: self.x << shift, z: self.z << shift })
    }

    pub fn ops(&self) -> Vec<Pauli> {
        (0..self.n).map(|q| self.get(q)).collect()
    }

    pub fn to_dense<T: Real>(&self) -> CMat<T> {
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for b in 0..dim as u64 {
            let (ph, b2) = self.apply_basis::<T>(b);
            m.set(b2 as usize, b as usize, ph);
        }
        m
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            for q in (0..self.n).rev() {
                let o = self.get(q).rank().cmp(&other.get(q).rank());
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n).rev() {
            write!(f, "{}", self.get(q).letter())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = QetuError;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n > MAX_QUBITS {
            return Err(QetuError::Parse(format!("string of {n} qubits is too long")));
        }
        let mut out = Self::identity(n);
        for (i, ch) in s.chars().enumerate() {
            let p = match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(QetuError::Parse(format!("bad Pauli letter {other:?}"))),
            };
            out.set(n - 1 - i, p);
        }
        Ok(out)
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
fn i_pow<T: Real>(e: u32) -> C<T> {
    match e % 4 {
        0 => c(T::one(), T::zero()),
        1 => c(T::zero(), T::one()),
        2 => c(-T::one(), T::zero()),
        _ => c(T::zero(), -T::one()),
    }
}

/// Complex-weighted sum of Pauli strings with deterministic (lexicographic) term order.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum<T: Real = f64> {
    n: usize,
    terms: BTreeMap<PauliString, C<T>>,
}

impl<T: Real> PauliSum<T> {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_term(PauliString::identity(n), c_re(T::one()))
    }

    pub fn from_term(p: PauliString, coeff: C<T>) -> Self {
        let mut s = Self::zero(p.n_qubits());
        s.add_term(p, coeff);
        s
    }

    /// Parses `"XZ"`-style strings paired with real coefficients.
    pub fn from_real_terms(n: usize, terms: &[(&str, f64)]) -> Result<Self> {
        let mut s = Self::zero(n);
        for (p, a) in terms {
            let p: PauliString = p.parse()?;
            if p.n_qubits() != n {
                return Err(QetuError::InvalidModel(format!("term {p} is not on {n} qubits")));
            }
            s.add_term(p, c_re(T::lit(*a)));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C<T>)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &PauliString) -> C<T> {
        self.terms.get(p).copied().unwrap_or(c_re(T::zero()))
    }

    /// Coefficient of the string written as text; zero if absent or unparsable.
    pub fn coeff_of(&self, p: &str) -> C<T> {
        p.parse::<PauliString>().map(|p| self.coeff(&p)).unwrap_or(c_re(T::zero()))
    }

    /// Adds `coeff * p`, dropping the term if it cancels.
    pub fn add_term(&mut self, p: PauliString, coeff: C<T>) {
        assert_eq!(p.n_qubits(), self.n, "register mismatch");
        let e = self.terms.entry(p).or_insert(c_re(T::zero()));
        *e += coeff;
        if e.norm() < T::lit(PRUNE_TOL) {
            self.terms.remove(&p);
        }
    }

    pub fn simplify(&mut self, tol: T) {
        self.terms.retain(|_, a| a.norm() >= tol);
    }

    pub fn scale(&self, s: C<T>) -> Self {
        let mut out = Self::zero(self.n);
        for (p, a) in &self.terms {
            out.add_term(*p, a * s);
        }
        out
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(c_re(s))
    }

    pub fn adjoint(&self) -> Self {
        Self { n: self.n, terms: self.terms.iter().map(|(p, a)| (*p, a.conj())).collect() }
    }

    /// Symbolic transpose: `Y^T = -Y`.
    pub fn transpose(&self) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(p, a)| (*p, if p.y_count() % 2 == 1 { -a } else { *a }))
                .collect(),
        }
    }

    /// Symbolic complex conjugate: conjugated coefficients and `Y* = -Y`.
    pub fn conjugate(&self) -> Self {
        self.transpose().adjoint()
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|a| a.im.abs() <= T::lit(PRUNE_TOL))
    }

    /// Coefficient of the identity string (real part).
    pub fn identity_coeff(&self) -> T {
        self.coeff(&PauliString::identity(self.n)).re
    }

    /// Sum of coefficient moduli.
    pub fn one_norm(&self) -> T {
        self.terms.values().map(|a| a.norm()).sum()
    }

    pub fn embed(&self, reg: Register, total: usize) -> Result<Self> {
        let mut out = Self::zero(total);
        for (p, a) in &self.terms {
            out.add_term(p.embed(reg, total)?, *a);
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`, with `self` on the high qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let total = self.n + other.n;
        let a = self.embed(Register::A, total)?;
        let b = other.embed(Register::B, total)?;
        Ok(&a * &b)
    }

    pub fn to_dense(&self) -> CMat<T> {
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for (p, a) in &self.terms {
            for b in 0..dim as u64 {
                let (ph, b2) = p.apply_basis::<T>(b);
                let idx = b2 as usize * dim + b as usize;
                m.data[idx] += ph * a;
            }
        }
        m
    }

    /// `out = self * amps` on a statevector of matching size.
    pub fn apply(&self, amps: &[C<T>]) -> Result<Vec<C<T>>> {
        if amps.len() != 1usize << self.n {
            return Err(QetuError::InvalidInput(format!(
                "vector of length {} does not match {} qubits",
                amps.len(),
                self.n
            )));
        }
        let mut out = vec![c_re(T::zero()); amps.len()];
        for (p, a) in &self.terms {
            for (b, v) in amps.iter().enumerate() {
                let (ph, b2) = p.apply_basis::<T>(b as u64);
                out[b2 as usize] += ph * a * v;
            }
        }
        Ok(out)
    }

    pub fn cast<U: Real>(&self) -> PauliSum<U> {
        PauliSum {
            n: self.n,
            terms: self.terms.iter().map(|(p, a)| (*p, c(U::lit(a.re.as_f64()), U::lit(a.im.as_f64())))).collect(),
        }
    }

    /// One term per line: `+re+imj STRING`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, a) in &self.terms {
            s.push_str(&format!("{:+.7}{:+.7}j {}\n", a.re.as_f64(), a.im.as_f64(), p));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut out: Option<Self> = None;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (num, ps) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| QetuError::Parse(format!("line {}: missing Pauli string", ln + 1)))?;
            let p: PauliString = ps.trim().parse()?;
            let coeff = parse_complex(num).ok_or_else(|| QetuError::Parse(format!("line {}: bad coefficient {num:?}", ln + 1)))?;
            let s = out.get_or_insert_with(|| Self::zero(p.n_qubits()));
            if s.n != p.n_qubits() {
                return Err(QetuError::Parse(format!("line {}: inconsistent register size", ln + 1)));
            }
            s.add_term(p, c(T::lit(coeff.0), T::lit(coeff.1)));
        }
        out.ok_or_else(|| QetuError::Parse("empty Pauli sum".into()))
    }
}

/// Parses `±a±bj`.
/// `re`, `re+imj` or `imj`.
fn parse_complex(s: &str) -> Option<(f64, f64)> {
    let Some(body) = s.strip_suffix('j') else {
        return Some((s.parse().ok()?, 0.0));
    };
    // split at the sign that starts the imaginary part (skip exponent signs)
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    match split {
        Some(i) => Some((body[..i].parse().ok()?, body[i..].parse().ok()?)),
        None => Some((0.0, body.parse().ok()?)),
    }
}

impl<T: Real> Add for &PauliSum<T> {
    type Output = PauliSum<T>;
    fn add(self, rhs: &PauliSum<T>) -> PauliSum<T> {
        assert_eq!(self.n, rhs.n, "register mismatch");
        let mut out = self.clone();
        for (p, a) in &rhs.terms {
            out.add_term(*p, *a);
        }
        out
    }
}

impl<T: Real> Sub for &PauliSum<T> {
    type Output = PauliSum<T>;
    fn sub(self, rhs: &PauliSum<T>) -> PauliSum<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Neg for &PauliSum<T> {
    type Output = PauliSum<T>;
    fn neg(self) -> PauliSum<T> {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Mul for &PauliSum<T> {
    type Output = PauliSum<T>;
    fn mul(self, rhs: &PauliSum<T>) -> PauliSum<T> {
        assert_eq!(self.n, rhs.n, "register mismatch");
        let mut out = PauliSum::zero(self.n);
        for (p, a) in &self.terms {
            for (q, b) in &rhs.terms {
                let (ph, r) = p.mul(q);
                out.add_term(r, a * b * c(T::lit(ph.re), T::lit(ph.im)));
            }
        }
        out
    }
}

impl<T: Real> fmt::Display for PauliSum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
