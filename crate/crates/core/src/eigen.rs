//! Finite-difference principal eigenvalue of
//!
//! ```text
//! L ψ = D ψ'' + ((1+q) D' − 2λ D) ψ' + (q D'' + λ² D − (1+q) λ D' + r) ψ
//! ```
//!
//! on a uniform periodic grid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{FieldError, PeriodicField};
use crate::linalg::solve_cyclic;
use crate::scalar::Real;

/// Coarsest grid used by [`k_value`].
pub const N_START: usize = 512;
/// Finest grid used by [`k_value`].
pub const N_MAX: usize = 65536;
/// Smallest grid accepted by [`assemble`].
pub const N_MIN: usize = 32;
/// Iteration cap for [`principal_eigenpair`].
pub const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("grid size {0} is too small (need at least {N_MIN})")]
    GridTooSmall(usize),
    #[error("eigen iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("eigenvector lost positivity at node {index} (value {value:e}); refine the grid")]
    NonPositive { index: usize, value: f64 },
    #[error("cell Peclet number {peclet} still exceeds 1 at n = {n}")]
    PecletViolated { n: usize, peclet: f64 },
    #[error("tolerance {tol:e} not met at n = {n}: k = {k}, change estimate {estimate:e}")]
    ToleranceNotMet { k: f64, estimate: f64, tol: f64, n: usize },
    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),
    #[error("non-finite operator coefficient at node {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `(r, D, q, λ)` and the grid size of a discretized operator.
#[derive(Clone, Debug)]
pub struct OperatorSpec<T: Real> {
    pub r: PeriodicField<T>,
    pub d: PeriodicField<T>,
    pub q: T,
    pub lambda: T,
    pub n: usize,
}

impl<T: Real> OperatorSpec<T> {
    pub fn new(r: &PeriodicField<T>, d: &PeriodicField<T>, q: T, lambda: T, n: usize) -> Self {
        Self {
            r: r.clone(),
            d: d.clone(),
            q,
            lambda,
            n,
        }
    }

    /// Period of the operator: that of `D` unless `D` is constant.
    pub fn period(&self) -> T {
        if self.d.as_constant().is_some() {
            self.r.period()
        } else {
            self.d.period()
        }
    }
}

/// Cyclic tridiagonal matrix. `sub[0]` is entry `(0, n-1)` and `sup[n-1]`
/// entry `(n-1, 0)`.
#[derive(Clone, Debug)]
pub struct PeriodicTridiagonal<T> {
    pub sub: Vec<T>,
    pub diag: Vec<T>,
    pub sup: Vec<T>,
    /// Row sums, i.e. the zero-order coefficient at each node.
    pub zeroth: Vec<T>,
    pub delta: T,
    /// All off-diagonal entries are nonnegative.
    pub m_structure: bool,
    /// Largest cell Peclet number `|b| Δ / (2 D)`.
    pub max_peclet: T,
}

impl<T: Real> PeriodicTridiagonal<T> {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Matrix built from nodal diffusion, drift and zero-order coefficients.
    pub fn from_coefficients(diffusion: &[T], drift: &[T], zeroth: &[T], delta: T) -> Result<Self, EigenError> {
        let n = diffusion.len();
        if n < N_MIN {
            return Err(EigenError::GridTooSmall(n));
        }
        let inv2 = T::one() / (delta * delta);
        let half = T::lit(0.5) / delta;
        let mut sub = Vec::with_capacity(n);
        let mut sup = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        let mut m_structure = true;
        let mut max_peclet = T::zero();
        for i in 0..n {
            let a = diffusion[i] * inv2;
            let b = drift[i] * half;
            let (lo, hi) = (a - b, a + b);
            let d = zeroth[i] - lo - hi;
            if !(lo.is_finite() && hi.is_finite() && d.is_finite()) {
                return Err(EigenError::NonFinite(i));
            }
            m_structure &= lo >= T::zero() && hi >= T::zero();
            max_peclet = max_peclet.max(drift[i].abs() * delta / (T::lit(2.0) * diffusion[i]));
            sub.push(lo);
            sup.push(hi);
            diag.push(d);
        }
        Ok(Self {
            sub,
            diag,
            sup,
            zeroth: zeroth.to_vec(),
            delta,
            m_structure,
            max_peclet,
        })
    }

    /// `M x`, evaluated as `sub (x_{i-1} − x_i) + sup (x_{i+1} − x_i) + c x_i`
    /// to avoid cancellation against the large diagonal.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let xm = x[if i == 0 { n - 1 } else { i - 1 }];
                let xp = x[if i + 1 == n { 0 } else { i + 1 }];
                self.sub[i] * (xm - x[i]) + self.sup[i] * (xp - x[i]) + self.zeroth[i] * x[i]
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n();
        let sub: Vec<T> = (0..n).map(|i| self.sup[(i + n - 1) % n]).collect();
        let sup: Vec<T> = (0..n).map(|i| self.sub[(i + 1) % n]).collect();
        let zeroth = (0..n).map(|i| self.diag[i] + sub[i] + sup[i]).collect();
        Self {
            sub,
            diag: self.diag.clone(),
            sup,
            zeroth,
            delta: self.delta,
            m_structure: self.m_structure,
            max_peclet: self.max_peclet,
        }
    }

    /// Dense row-major copy (for tests and small problems).
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.n();
        let mut a = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            a[i][(i + n - 1) % n] = a[i][(i + n - 1) % n] + self.sub[i];
            a[i][(i + 1) % n] = a[i][(i + 1) % n] + self.sup[i];
        }
        a
    }

    fn norm_inf(&self) -> T {
        (0..self.n())
            .map(|i| self.sub[i].abs() + self.diag[i].abs() + self.sup[i].abs())
            .fold(T::zero(), T::max)
    }
}

/// Assembles `L_q^λ` by second-order central differences with `D`, `D'`,
/// `D''` and `r` evaluated at the nodes.
pub fn assemble<T: Real>(spec: &OperatorSpec<T>) -> Result<PeriodicTridiagonal<T>, EigenError> {
    let n = spec.n;
    if n < N_MIN {
        return Err(EigenError::GridTooSmall(n));
    }
    let delta = spec.period() / T::from_usize_lossy(n);
    let (q, lam) = (spec.q, spec.lambda);
    let one_q = T::one() + q;
    let mut diffusion = Vec::with_capacity(n);
    let mut drift = Vec::with_capacity(n);
    let mut zeroth = Vec::with_capacity(n);
    for i in 0..n {
        let x = delta * T::from_usize_lossy(i);
        let jd = spec.d.jet(x);
        let (d, d1, d2) = (jd.d(0), jd.d(1), jd.d(2));
        if !(d > T::zero()) {
            return Err(FieldError::NonPositive {
                x: x.to_f64_lossy(),
                value: d.to_f64_lossy(),
            }
            .into());
        }
        diffusion.push(d);
        drift.push(one_q * d1 - T::lit(2.0) * lam * d);
        zeroth.push(q * d2 + lam * lam * d - one_q * lam * d1 + spec.r.eval(x));
    }
    PeriodicTridiagonal::from_coefficients(&diffusion, &drift, &zeroth, delta)
}

/// Principal eigenpair of a cyclic tridiagonal operator.
#[derive(Clone, Debug)]
pub struct EigenResult<T> {
    pub k: T,
    /// Positive eigenvector, normalized to maximum 1.
    pub phi: Vec<T>,
    /// `‖M φ − k φ‖_∞`.
    pub residual: T,
    pub n_used: usize,
    pub iterations: usize,
}

/// Residual floor set by rounding in `M x` at this grid size.
pub fn residual_floor<T: Real>(m: &PeriodicTridiagonal<T>) -> T {
    let off = (0..m.n())
        .map(|i| m.sub[i].abs() + m.sup[i].abs())
        .fold(T::zero(), T::max);
    T::lit(16.0) * T::epsilon() * off
}

/// Principal eigenpair by shifted inverse iteration.
///
/// Each step solves `(σ I − M) y = x`. The shift sits above the
/// Collatz–Wielandt upper bound `max_i (M x)_i / x_i` by the current bracket
/// width, so `σ I − M` stays a nonsingular M-matrix with positive inverse and
/// the iteration contracts toward the Perron vector.
pub fn principal_eigenpair<T: Real>(m: &PeriodicTridiagonal<T>, start: Option<&[T]>) -> Result<EigenResult<T>, EigenError> {
    let n = m.n();
    if n < N_MIN {
        return Err(EigenError::GridTooSmall(n));
    }
    let mut x: Vec<T> = match start {
        Some(s) if s.len() == n && s.iter().all(|v| *v > T::zero() && v.is_finite()) => s.to_vec(),
        _ => vec![T::one(); n],
    };
    normalize_max(&mut x);

    let floor = residual_floor(m);
    let gap_floor = T::lit(1e-10) + T::lit(64.0) * T::epsilon() * m.norm_inf();
    let mut k_prev = T::nan();
    let mut extra_gap = T::zero();
    let mut residual = T::infinity();
    let mut neg_diag = vec![T::zero(); n];
    let neg_sub: Vec<T> = m.sub.iter().map(|v| -*v).collect();
    let neg_sup: Vec<T> = m.sup.iter().map(|v| -*v).collect();

    for it in 1..=MAX_ITERATIONS {
        let mx = m.apply(&x);
        let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
        let (mut num, mut den) = (T::zero(), T::zero());
        for i in 0..n {
            let ratio = mx[i] / x[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            num = num + x[i] * mx[i];
            den = den + x[i] * x[i];
        }
        let k = num / den;
        residual = (0..n).map(|i| (mx[i] - k * x[i]).abs()).fold(T::zero(), T::max);

        let scale = T::one() + k.abs();
        let k_tol = (T::lit(1e-12) * scale).max(floor);
        let r_tol = (T::lit(1e-9) * scale).max(floor);
        if (k - k_prev).abs() <= k_tol && residual <= r_tol {
            return Ok(EigenResult {
                k,
                phi: x,
                residual,
                n_used: n,
                iterations: it,
            });
        }
        k_prev = k;

        let gap = (hi - lo).max(gap_floor * (T::one() + hi.abs())) + extra_gap;
        let sigma = hi + gap;
        for i in 0..n {
            neg_diag[i] = sigma - m.diag[i];
        }
        let y = solve_cyclic(&neg_sub, &neg_diag, &neg_sup, &x);
        match y.and_then(|mut y| positive_direction(&mut y).then_some(y)) {
            Some(mut y) => {
                normalize_max(&mut y);
                x = y;
                extra_gap = T::zero();
            }
            None => {
                // rounding pushed σ below the spectrum: back off
                extra_gap = (extra_gap * T::lit(10.0)).max(gap);
                if extra_gap > T::lit(1e6) * (T::one() + hi.abs()) {
                    let (index, value) = min_entry(&x);
                    return Err(EigenError::NonPositive { index, value: value.to_f64_lossy() });
                }
            }
        }
    }
    Err(EigenError::NotConverged {
        iterations: MAX_ITERATIONS,
        residual: residual.to_f64_lossy(),
    })
}

/// Flips `y` to the positive orthant when it is single-signed.
fn positive_direction<T: Real>(y: &mut [T]) -> bool {
    let pos = y.iter().all(|v| *v > T::zero());
    if pos {
        return true;
    }
    if y.iter().all(|v| *v < T::zero()) {
        for v in y.iter_mut() {
            *v = -*v;
        }
        return true;
    }
    false
}

fn normalize_max<T: Real>(x: &mut [T]) {
    let m = x.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    for v in x.iter_mut() {
        *v = *v / m;
    }
}

fn min_entry<T: Real>(x: &[T]) -> (usize, T) {
    x.iter()
        .copied()
        .enumerate()
        .fold((0, T::infinity()), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) })
}

/// Last eigenvector at each grid size, reused as the next starting vector.
#[derive(Clone, Debug, Default)]
pub struct WarmStart<T> {
    vectors: HashMap<usize, Vec<T>>,
}

impl<T: Real> WarmStart<T> {
    pub fn new() -> Self {
        Self { vectors: HashMap::new() }
    }

    pub fn get(&self, n: usize) -> Option<&[T]> {
        self.vectors.get(&n).map(|v| v.as_slice())
    }

    pub fn store(&mut self, phi: &[T]) {
        self.vectors.insert(phi.len(), phi.to_vec());
    }
}

/// Solve at one grid size, reusing and refreshing the warm start.
pub fn solve_at<T: Real>(spec: &OperatorSpec<T>, warm: &mut WarmStart<T>) -> Result<(PeriodicTridiagonal<T>, EigenResult<T>), EigenError> {
    let m = assemble(spec)?;
    let res = principal_eigenpair(&m, warm.get(spec.n))?;
    warm.store(&res.phi);
    Ok((m, res))
}

/// Refined principal eigenvalue and the finest grid used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KValue<T> {
    pub k: T,
    pub n_used: usize,
    /// Gap between the last two extrapolation levels.
    pub error_estimate: T,
}

/// `k_q^λ[r; D]` by grid doubling from `n = 512` with Richardson
/// extrapolation in `Δ²`.
pub fn k_value<T: Real>(r: &PeriodicField<T>, d: &PeriodicField<T>, q: T, lambda: T, tol: T) -> Result<KValue<T>, EigenError> {
    k_value_warm(r, d, q, lambda, tol, &mut WarmStart::new())
}

/// [`k_value`] with caller-held warm-start vectors.
pub fn k_value_warm<T: Real>(
    r: &PeriodicField<T>,
    d: &PeriodicField<T>,
    q: T,
    lambda: T,
    tol: T,
    warm: &mut WarmStart<T>,
) -> Result<KValue<T>, EigenError> {
    d.check_diffusion()?;
    richardson(tol, |n| assemble(&OperatorSpec::new(r, d, q, lambda, n)), warm)
}

/// Grid-doubling driver shared by every discretized operator.
///
/// Grids whose matrix lacks M-structure are skipped. The eigenvalues on the
/// remaining grids fill a Romberg table in powers of `Δ²`; the first column
/// step is `k_{2n} + (k_{2n} − k_n)/3`. Stops once the last two
/// extrapolation levels differ by less than `tol`.
pub fn richardson<T: Real, F>(tol: T, build: F, warm: &mut WarmStart<T>) -> Result<KValue<T>, EigenError>
where
    F: Fn(usize) -> Result<PeriodicTridiagonal<T>, EigenError>,
{
    if !(tol > T::zero()) {
        return Err(EigenError::InvalidTolerance(tol.to_f64_lossy()));
    }
    let mut n = N_START;
    let mut prev_row: Vec<T> = Vec::new();
    let mut best = (T::nan(), T::infinity());
    loop {
        let m = build(n)?;
        if m.m_structure {
            let res = principal_eigenpair(&m, warm.get(n))?;
            warm.store(&res.phi);
            let mut row = vec![res.k];
            let mut factor = T::one();
            for j in 1..=prev_row.len() {
                factor = factor * T::lit(4.0);
                let v = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - T::one());
                row.push(v);
            }
            if row.len() > 1 {
                let last = row.len() - 1;
                let estimate = (row[last] - row[last - 1]).abs();
                if estimate < best.1 {
                    best = (row[last], estimate);
                }
                if estimate < tol {
                    return Ok(KValue {
                        k: row[last],
                        n_used: n,
                        error_estimate: estimate,
                    });
                }
            }
            prev_row = row;
        } else if n >= N_MAX {
            return Err(EigenError::PecletViolated {
                n,
                peclet: m.max_peclet.to_f64_lossy(),
            });
        }
        if n >= N_MAX {
            return Err(EigenError::ToleranceNotMet {
                k: best.0.to_f64_lossy(),
                estimate: best.1.to_f64_lossy(),
                tol: tol.to_f64_lossy(),
                n,
            });
        }
        n *= 2;
    }
}
