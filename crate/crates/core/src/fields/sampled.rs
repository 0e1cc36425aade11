use crate::scalar::Real;

use super::jet::{Jet, JET_LEN};

/// Minimum number of samples for the 4th-order periodic stencils.
pub const MIN_SAMPLES: usize = 8;

/// Values on a uniform periodic grid `x_i = i h`, with derivative tables
/// precomputed by 4th-order central differences. Off-grid evaluation uses
/// 6-point Lagrange interpolation of each table.
#[derive(Clone, Debug)]
pub struct SampledField<T: Real> {
    tables: [Vec<T>; JET_LEN],
    h: T,
}

pub(crate) fn first_difference<T: Real>(v: &[T], h: T) -> Vec<T> {
    let n = v.len();
    let eight = T::lit(8.0);
    let twelve_h = T::lit(12.0) * h;
    (0..n)
        .map(|i| {
            let m2 = v[(i + n - 2) % n];
            let m1 = v[(i + n - 1) % n];
            let p1 = v[(i + 1) % n];
            let p2 = v[(i + 2) % n];
            (m2 - p2 + eight * (p1 - m1)) / twelve_h
        })
        .collect()
}

pub(crate) fn second_difference<T: Real>(v: &[T], h: T) -> Vec<T> {
    let n = v.len();
    let sixteen = T::lit(16.0);
    let thirty = T::lit(30.0);
    let twelve_h2 = T::lit(12.0) * h * h;
    (0..n)
        .map(|i| {
            let m2 = v[(i + n - 2) % n];
            let m1 = v[(i + n - 1) % n];
            let p1 = v[(i + 1) % n];
            let p2 = v[(i + 2) % n];
            (-(m2 + p2) + sixteen * (m1 + p1) - thirty * v[i]) / twelve_h2
        })
        .collect()
}

impl<T: Real> SampledField<T> {
    pub fn new(values: Vec<T>, period: T) -> Self {
        let n = values.len();
        assert!(n >= MIN_SAMPLES);
        let h = period / T::from_usize_lossy(n);
        let d1 = first_difference(&values, h);
        let d2 = second_difference(&values, h);
        let d3 = first_difference(&d2, h);
        let d4 = second_difference(&d2, h);
        Self {
            tables: [values, d1, d2, d3, d4],
            h,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.tables[0]
    }

    pub fn len(&self) -> usize {
        self.tables[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables[0].is_empty()
    }

    /// Table of the first or second derivative (4th-order differences).
    pub fn derivative_table(&self, order: usize) -> &[T] {
        &self.tables[order]
    }

    /// Jet at `x`, already reduced to `[0, period)`.
    pub fn jet(&self, x: T) -> Jet<T> {
        let n = self.len();
        let s = x / self.h;
        let base = s.floor();
        let u = s - base;
        let i0 = base.to_usize().unwrap_or(0) % n;
        let mut d = [T::zero(); JET_LEN];
        if u == T::zero() {
            for (k, slot) in d.iter_mut().enumerate() {
                *slot = self.tables[k][i0];
            }
            return Jet(d);
        }
        let w = lagrange6(u);
        for (k, slot) in d.iter_mut().enumerate() {
            let t = &self.tables[k];
            let mut acc = T::zero();
            for (j, wj) in w.iter().enumerate() {
                // offsets -2..=3
                let idx = (i0 + n + j - 2) % n;
                acc = acc + *wj * t[idx];
            }
            *slot = acc;
        }
        Jet(d)
    }
}

/// Lagrange weights for nodes at offsets -2..=3 evaluated at `u ∈ (0,1)`.
fn lagrange6<T: Real>(u: T) -> [T; 6] {
    let nodes = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    let mut w = [T::zero(); 6];
    for k in 0..6 {
        let mut num = T::one();
        let mut den = T::one();
        for j in 0..6 {
            if j != k {
                num = num * (u - T::lit(nodes[j]));
                den = den * T::lit(nodes[k] - nodes[j]);
            }
        }
        w[k] = num / den;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivatives_are_fourth_order() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let v: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 * h).sin()).collect();
            let s = SampledField::new(v, 1.0);
            (0..n)
                .map(|i| (s.derivative_table(1)[i] - 2.0 * PI * (2.0 * PI * i as f64 * h).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn interpolates_smooth_data_between_nodes() {
        let n = 256;
        let v: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).cos()).collect();
        let s = SampledField::new(v, 1.0);
        let x = 0.123_456;
        assert!((s.jet(x).value() - (2.0 * PI * x).cos()).abs() < 1e-11);
    }
}
