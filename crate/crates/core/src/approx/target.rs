//! Target eigenvalue transforms on the scaled-energy variable.

use serde::{Deserialize, Serialize};

use crate::error::{QetuError, Result};
use crate::scalar::Real;
use crate::spectrum::ScaledHamiltonian;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `exp(-tau (E - E0))`, protects the lowest energy.
    Forward,
    /// `exp(+tau (E - Emax))`, protects the highest energy.
    Reverse,
}

/// Plateau tolerance of the smoothed step.
pub const STEP_EPS: f64 = 1e-3;
// erfc(2.5)/2 ~ 2e-4 < STEP_EPS
const STEP_SHARPNESS: f64 = 2.5;

#[derive(Clone, Debug, PartialEq)]
pub enum TargetKind<T: Real> {
    Ite { tau: T, direction: Direction },
    /// Smoothed step from 1 (below `mu`) to 0 (above), both in scaled energy.
    Heaviside { mu: T, smoothing: T },
    /// Piecewise-linear through `(x, y)` samples with increasing `x`.
    Tabulated { xs: Vec<T>, ys: Vec<T> },
}

/// A real function of the scaled energy `x = E t + sigma` on `[eta, pi/2 - eta]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetFunction<T: Real = f64> {
    pub kind: TargetKind<T>,
    pub eta: T,
    pub t: T,
    pub sigma: T,
}

impl<T: Real> TargetFunction<T> {
    pub fn domain(&self) -> (T, T) {
        (self.eta, T::FRAC_PI_2() - self.eta)
    }

    /// Scaled energy at which the target equals 1 by construction, if any.
    pub fn protected_point(&self) -> Option<T> {
        match &self.kind {
            TargetKind::Ite { direction: Direction::Forward, .. } => Some(self.domain().0),
            TargetKind::Ite { direction: Direction::Reverse, .. } => Some(self.domain().1),
            _ => None,
        }
    }

    pub fn eval(&self, x: T) -> T {
        match &self.kind {
            TargetKind::Ite { tau, direction } => {
                let (lo, hi) = self.domain();
                match direction {
                    Direction::Forward => (-*tau * (x - lo) / self.t).exp(),
                    Direction::Reverse => (*tau * (x - hi) / self.t).exp(),
                }
            }
            TargetKind::Heaviside { mu, smoothing } => {
                let z = T::lit(2.0 * STEP_SHARPNESS) * (x - *mu) / *smoothing;
                T::lit(0.5 * libm::erfc(z.as_f64()))
            }
            TargetKind::Tabulated { xs, ys } => {
                let k = xs.partition_point(|v| *v <= x);
                if k == 0 {
                    ys[0]
                } else if k == xs.len() {
                    ys[xs.len() - 1]
                } else {
                    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                    ys[k - 1] + w * (ys[k] - ys[k - 1])
                }
            }
        }
    }

    /// Value in unscaled energy.
    pub fn eval_energy(&self, e: T) -> T {
        self.eval(e * self.t + self.sigma)
    }

    /// Multiplier `c` such that `f(E) = c * g(E)` for the unnormalized transform `g`
    /// (`exp(-tau E)` forward, `exp(+tau E)` reverse). Only defined for ITE targets.
    pub fn normalization(&self) -> Option<T> {
        match &self.kind {
            TargetKind::Ite { tau, direction } => {
                let (lo, hi) = self.domain();
                Some(match direction {
                    Direction::Forward => (*tau * (lo - self.sigma) / self.t).exp(),
                    Direction::Reverse => (-*tau * (hi - self.sigma) / self.t).exp(),
                })
            }
            _ => None,
        }
    }
}

/// Normalized imaginary-time transform with maximum 1 at the protected end of the domain.
pub fn ite_target<T: Real>(scaled: &ScaledHamiltonian<T>, tau: T, direction: Direction) -> Result<TargetFunction<T>> {
    if !(tau >= T::zero()) {
        return Err(QetuError::InvalidInput(format!("tau = {tau} must be non-negative")));
    }
    Ok(TargetFunction { kind: TargetKind::Ite { tau, direction }, eta: scaled.eta, t: scaled.t, sigma: scaled.sigma })
}

/// Erf-smoothed step at scaled energy `mu`: within `STEP_EPS` of 1 below `mu - smoothing/2`
/// and of 0 above `mu + smoothing/2`.
pub fn heaviside_target<T: Real>(scaled: &ScaledHamiltonian<T>, mu: T, smoothing: T) -> Result<TargetFunction<T>> {
    let (lo, hi) = (scaled.eta, T::FRAC_PI_2() - scaled.eta);
    if !(mu > lo && mu < hi) {
        return Err(QetuError::InvalidInput(format!("step position {mu} outside ({lo}, {hi})")));
    }
    if !(smoothing > T::zero() && smoothing < hi - lo) {
        return Err(QetuError::InvalidInput(format!("smoothing {smoothing} must be positive and narrower than the domain")));
    }
    Ok(TargetFunction { kind: TargetKind::Heaviside { mu, smoothing }, eta: scaled.eta, t: scaled.t, sigma: scaled.sigma })
}

/// Piecewise-linear target through samples of the scaled energy.
pub fn tabulated_target<T: Real>(scaled: &ScaledHamiltonian<T>, xs: Vec<T>, ys: Vec<T>) -> Result<TargetFunction<T>> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(QetuError::InvalidInput("tabulated target needs at least two matching samples".into()));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(QetuError::InvalidInput("tabulated abscissae must increase".into()));
    }
    if ys.iter().any(|y| !(y.abs() <= T::one())) {
        return Err(QetuError::InvalidInput("tabulated values must lie in [-1, 1]".into()));
    }
    Ok(TargetFunction { kind: TargetKind::Tabulated { xs, ys }, eta: scaled.eta, t: scaled.t, sigma: scaled.sigma })
}
