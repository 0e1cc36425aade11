//! Persistence eigenvalue `k_q^0` and spreading speed
//! `c* = inf_{λ>0} k_q^{±λ} / λ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::{k_value_warm, EigenError, WarmStart};
use crate::fields::{sqrt_harmonic_mean, FieldError, PeriodicField};
use crate::scalar::Real;

/// Bracketing gives up beyond `λ = 2^40` (or below `2^-40`).
pub const LAMBDA_LIMIT: f64 = 1_099_511_627_776.0;
/// Relative width at which golden-section search stops.
pub const LAMBDA_TOL: f64 = 1e-6;
/// Smallest eigenvalue tolerance handed to the eigensolver.
pub const EIGEN_TOL_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Left => "left",
            Direction::Right => "right",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpeedError {
    #[error("no spreading: persistence eigenvalue {persistence} is not above the tolerance")]
    Extinction { persistence: f64 },
    #[error("minimizer bracket left [2^-40, 2^40] (last λ = {lambda})")]
    BracketExceeded { lambda: f64 },
    #[error("growth rate must be positive, got {0}")]
    InvalidGrowth(f64),
    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedResult<T> {
    pub c_star: T,
    pub lambda_star: T,
    pub direction: Direction,
    pub k_at_lambda_star: T,
    pub bracket: (T, T),
    pub evaluations: usize,
    /// `k_q^0`, checked positive before the search.
    pub persistence: T,
}

/// `k_q^0[r; D]`.
pub fn persistence<T: Real>(r: &PeriodicField<T>, d: &PeriodicField<T>, q: T, tol: T) -> Result<T, EigenError> {
    persistence_warm(r, d, q, tol, &mut WarmStart::new())
}

fn persistence_warm<T: Real>(
    r: &PeriodicField<T>,
    d: &PeriodicField<T>,
    q: T,
    tol: T,
    warm: &mut WarmStart<T>,
) -> Result<T, EigenError> {
    Ok(k_value_warm(r, d, q, T::zero(), tol, warm)?.k)
}

/// Spreading speed in the given direction, to relative tolerance `tol`.
pub fn spreading_speed<T: Real>(
    r: &PeriodicField<T>,
    d: &PeriodicField<T>,
    q: T,
    direction: Direction,
    tol: T,
) -> Result<SpeedResult<T>, SpeedError> {
    if !(tol > T::zero()) {
        return Err(SpeedError::InvalidTolerance(tol.to_f64_lossy()));
    }
    let mut warm = WarmStart::new();
    let floor = T::lit(EIGEN_TOL_FLOOR);
    let k0 = persistence_warm(r, d, q, (T::lit(1e-2) * tol).max(floor), &mut warm)?;
    if !(k0 > tol) {
        return Err(SpeedError::Extinction {
            persistence: k0.to_f64_lossy(),
        });
    }
    let sign = match direction {
        Direction::Right => T::one(),
        Direction::Left => -T::one(),
    };
    let mut evaluations = 0usize;
    let mut eval = |lam: T| -> Result<(T, T), SpeedError> {
        evaluations += 1;
        let eig_tol = (T::lit(1e-2) * tol * lam).max(floor);
        let k = k_value_warm(r, d, q, sign * lam, eig_tol, &mut warm)?.k;
        Ok((k / lam, k))
    };

    // bracket g(λ/2) > g(λ) < g(2λ)
    let two = T::lit(2.0);
    let limit = T::lit(LAMBDA_LIMIT);
    let mut lam = T::one();
    let mut g_mid = eval(lam)?;
    let mut g_lo = eval(lam / two)?;
    let mut g_hi = eval(lam * two)?;
    loop {
        if g_lo.0 > g_mid.0 && g_mid.0 < g_hi.0 {
            break;
        }
        if g_hi.0 <= g_mid.0 {
            lam = lam * two;
            if lam > limit {
                return Err(SpeedError::BracketExceeded { lambda: lam.to_f64_lossy() });
            }
            g_lo = g_mid;
            g_mid = g_hi;
            g_hi = eval(lam * two)?;
        } else {
            lam = lam / two;
            if lam < limit.recip() {
                return Err(SpeedError::BracketExceeded { lambda: lam.to_f64_lossy() });
            }
            g_hi = g_mid;
            g_mid = g_lo;
            g_lo = eval(lam / two)?;
        }
    }

    // golden section on [λ/2, 2λ]
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / two;
    let (mut a, mut b) = (lam / two, lam * two);
    let mut best = (lam, g_mid);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let lam_tol = T::lit(LAMBDA_TOL);
    while b - a >= lam_tol * (T::one() + best.0) {
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f.0 < best.1 .0 {
                best = (x, f);
            }
        }
        if f1.0 < f2.0 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2)?;
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f.0 < best.1 .0 {
            best = (x, f);
        }
    }
    let (lambda_star, (_, k_star)) = best;
    Ok(SpeedResult {
        c_star: k_star / lambda_star,
        lambda_star,
        direction,
        k_at_lambda_star: k_star,
        bracket: (a, b),
        evaluations,
        persistence: k0,
    })
}

/// `2 √r0 ⟨√D⟩_H`, the speed for constant growth rate `r0` at `q = 1/2`.
pub fn stratonovich_speed<T: Real>(r0: T, d: &PeriodicField<T>) -> Result<T, SpeedError> {
    if !(r0 > T::zero()) {
        return Err(SpeedError::InvalidGrowth(r0.to_f64_lossy()));
    }
    Ok(T::lit(2.0) * r0.sqrt() * sqrt_harmonic_mean(d)?)
}
