//! Truncated derivative jets `(f, f', f'', f''', f'''')` with Leibniz-rule
//! arithmetic. Composite fields evaluate through these so that D' and D''
//! stay analytic for products, quotients, powers and exponentials.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Real;

/// Number of stored orders (0 through 4).
pub const JET_LEN: usize = 5;

const BINOM: [[f64; JET_LEN]; JET_LEN] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T: Real>(pub [T; JET_LEN]);

impl<T: Real> Jet<T> {
    pub fn constant(c: T) -> Self {
        let mut d = [T::zero(); JET_LEN];
        d[0] = c;
        Jet(d)
    }

    #[inline]
    pub fn value(&self) -> T {
        self.0[0]
    }

    #[inline]
    pub fn d(&self, order: usize) -> T {
        self.0[order]
    }

    /// Jet of the `order`-th derivative. Orders shifted past the end are NaN
    /// so that accidental use of an unavailable derivative is visible.
    pub fn shifted(&self, order: usize) -> Self {
        let mut d = [T::nan(); JET_LEN];
        for (k, slot) in d.iter_mut().enumerate() {
            if k + order < JET_LEN {
                *slot = self.0[k + order];
            }
        }
        Jet(d)
    }

    /// Chain rule for `f(a x)`.
    pub fn dilated(&self, factor: T) -> Self {
        let mut d = self.0;
        let mut s = T::one();
        for v in d.iter_mut() {
            *v = *v * s;
            s = s * factor;
        }
        Jet(d)
    }

    pub fn scale(&self, s: T) -> Self {
        Jet(self.0.map(|v| v * s))
    }

    pub fn recip(&self) -> Self {
        Jet::constant(T::one()).div(self)
    }

    pub fn div(&self, g: &Self) -> Self {
        let mut h = [T::zero(); JET_LEN];
        for n in 0..JET_LEN {
            let mut acc = self.0[n];
            for k in 1..=n {
                acc = acc - T::lit(BINOM[n][k]) * g.0[k] * h[n - k];
            }
            h[n] = acc / g.0[0];
        }
        Jet(h)
    }

    pub fn exp(&self) -> Self {
        let mut h = [T::zero(); JET_LEN];
        h[0] = self.0[0].exp();
        for n in 1..JET_LEN {
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + T::lit(BINOM[n - 1][k]) * self.0[k + 1] * h[n - 1 - k];
            }
            h[n] = acc;
        }
        Jet(h)
    }

    pub fn ln(&self) -> Self {
        // (ln f)' = f'/f
        let q = self.shifted(1).div(self);
        let mut h = [T::nan(); JET_LEN];
        h[0] = self.0[0].ln();
        h[1..JET_LEN].copy_from_slice(&q.0[..JET_LEN - 1]);
        Jet(h)
    }

    pub fn powf(&self, p: T) -> Self {
        if p == T::one() {
            return *self;
        }
        if p == T::zero() {
            return Jet::constant(T::one());
        }
        if p == T::lit(2.0) {
            return *self * *self;
        }
        self.ln().scale(p).exp()
    }

    pub fn sqrt(&self) -> Self {
        self.powf(T::lit(0.5))
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut d = self.0;
        for (a, b) in d.iter_mut().zip(o.0) {
            *a = *a + b;
        }
        Jet(d)
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut d = self.0;
        for (a, b) in d.iter_mut().zip(o.0) {
            *a = *a - b;
        }
        Jet(d)
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet(self.0.map(|v| -v))
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, g: Self) -> Self {
        let mut h = [T::zero(); JET_LEN];
        for (n, slot) in h.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in 0..=n {
                acc = acc + T::lit(BINOM[n][k]) * self.0[k] * g.0[n - k];
            }
            *slot = acc;
        }
        Jet(h)
    }
}
