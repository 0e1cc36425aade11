use crate::linalg::solve_cyclic;
use crate::scalar::Real;

use super::jet::{Jet, JET_LEN};

/// C² periodic cubic spline through equally spaced knots `x_j = j h`,
/// `h = period / m`. Stores knot values and knot second derivatives.
#[derive(Clone, Debug)]
pub struct PeriodicSpline<T: Real> {
    values: Vec<T>,
    second: Vec<T>,
    h: T,
}

impl<T: Real> PeriodicSpline<T> {
    /// `values` holds one period of knot values (no repeated seam value).
    pub fn new(values: &[T], period: T) -> Self {
        let m = values.len();
        assert!(m >= 3, "periodic spline needs at least 3 knots per period");
        let h = period / T::from_usize_lossy(m);
        let six_h2 = T::lit(6.0) / (h * h);
        let rhs: Vec<T> = (0..m)
            .map(|j| {
                let prev = values[(j + m - 1) % m];
                let next = values[(j + 1) % m];
                six_h2 * (next - T::lit(2.0) * values[j] + prev)
            })
            .collect();
        let ones = vec![T::one(); m];
        let fours = vec![T::lit(4.0); m];
        let second = solve_cyclic(&ones, &fours, &ones, &rhs).expect("spline system is diagonally dominant");
        Self {
            values: values.to_vec(),
            second,
            h,
        }
    }

    pub fn knot_values(&self) -> &[T] {
        &self.values
    }

    pub fn knot_second_derivatives(&self) -> &[T] {
        &self.second
    }

    /// Jet at `x`, already reduced to `[0, period)`.
    pub fn jet(&self, x: T) -> Jet<T> {
        let m = self.values.len();
        let s = x / self.h;
        let mut j = s.floor().to_usize().unwrap_or(0);
        if j >= m {
            j = m - 1;
        }
        let xj = self.h * T::from_usize_lossy(j);
        let b = (x - xj) / self.h;
        let a = T::one() - b;
        let (y0, y1) = (self.values[j], self.values[(j + 1) % m]);
        let (m0, m1) = (self.second[j], self.second[(j + 1) % m]);
        let h = self.h;
        let six = T::lit(6.0);
        let three = T::lit(3.0);

        let mut d = [T::zero(); JET_LEN];
        d[0] = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / six;
        d[1] = (y1 - y0) / h - (three * a * a - T::one()) / six * h * m0 + (three * b * b - T::one()) / six * h * m1;
        d[2] = a * m0 + b * m1;
        d[3] = (m1 - m0) / h;
        Jet(d)
    }
}
