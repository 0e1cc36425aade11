//! Cyclic tridiagonal solves.
//!
//! Row `i` reads `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`
//! with indices taken modulo `n`, so `sub[0]` is the top-right corner and
//! `sup[n-1]` the bottom-left corner.

use crate::scalar::Real;

/// Plain Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
fn thomas<T: Real>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T], out: &mut [T], cp: &mut [T]) -> bool {
    let n = diag.len();
    let mut denom = diag[0];
    if denom == T::zero() {
        return false;
    }
    cp[0] = sup[0] / denom;
    out[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * cp[i - 1];
        if denom == T::zero() {
            return false;
        }
        cp[i] = if i + 1 < n { sup[i] / denom } else { T::zero() };
        out[i] = (rhs[i] - sub[i] * out[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        out[i] = out[i] - cp[i] * out[i + 1];
    }
    true
}

/// Solves the cyclic system by a Thomas sweep plus a Sherman–Morrison
/// correction for the two corner entries. Returns `None` on a zero pivot.
pub fn solve_cyclic<T: Real>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Option<Vec<T>> {
    let n = diag.len();
    assert!(n >= 3, "cyclic system needs at least 3 rows");
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n);

    let beta = sub[0]; // row 0, column n-1
    let alpha = sup[n - 1]; // row n-1, column 0
    let gamma = -diag[0];
    if gamma == T::zero() {
        return None;
    }

    let mut bb = diag.to_vec();
    bb[0] = diag[0] - gamma;
    bb[n - 1] = diag[n - 1] - alpha * beta / gamma;

    let mut cp = vec![T::zero(); n];
    let mut x = vec![T::zero(); n];
    if !thomas(sub, &bb, sup, rhs, &mut x, &mut cp) {
        return None;
    }
    let mut u = vec![T::zero(); n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let mut z = vec![T::zero(); n];
    if !thomas(sub, &bb, sup, &u, &mut z, &mut cp) {
        return None;
    }

    let denom = T::one() + z[0] + beta * z[n - 1] / gamma;
    if denom == T::zero() {
        return None;
    }
    let fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    for (xi, zi) in x.iter_mut().zip(&z) {
        *xi = *xi - fact * *zi;
    }
    Some(x)
}

/// `y = A x` for the cyclic tridiagonal matrix `A`.
pub fn cyclic_matvec<T: Real>(sub: &[T], diag: &[T], sup: &[T], x: &[T]) -> Vec<T> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let im = if i == 0 { n - 1 } else { i - 1 };
            let ip = if i + 1 == n { 0 } else { i + 1 };
            sub[i] * x[im] + diag[i] * x[i] + sup[i] * x[ip]
        })
        .collect()
}
