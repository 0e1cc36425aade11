//! Periodic coefficient functions: the growth rate `r`, the diffusion
//! coefficient `D`, and every field derived from them.
//!
//! Closed-form kinds (constants, shifted `cos²` profiles and splines)
//! evaluate analytically together with their first four derivatives.
//! Sampled data carry 4th-order difference tables. Composites combine the
//! above pointwise and propagate derivatives by the chain/Leibniz rules.

mod extrema;
pub mod jet;
mod sampled;
mod spec;
mod spline;

use std::ops::{Add, Div, Mul, Sub};
use std::sync::Arc;

use thiserror::Error;

use crate::quadrature;
use crate::scalar::Real;

pub use extrema::{find_extrema, Extremum, ExtremaSet};
use jet::Jet;
pub use sampled::{SampledField, MIN_SAMPLES};
pub use spec::FieldSpec;
pub use spline::PeriodicSpline;

/// Scan resolution used for positivity checks.
pub const POSITIVITY_SCAN: usize = 1024;
/// Smallest admissible value of a diffusion coefficient on the scan.
pub const POSITIVITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("derivative order {0} not supported (expected 1 or 2)")]
    InvalidOrder(usize),
    #[error("field is not positive: value {value} at x = {x}")]
    NonPositive { x: f64, value: f64 },
    #[error("spline seam mismatch: first control {first} != last control {last}")]
    SeamMismatch { first: f64, last: f64 },
    #[error("spline control {index} = {value} outside the open interval ({lo}, {hi})")]
    ControlOutOfRange { index: usize, value: f64, lo: f64, hi: f64 },
    #[error("spline needs {expected} control values, got {got}")]
    ControlCount { expected: usize, got: usize },
    #[error("sampled field needs at least {MIN_SAMPLES} values, got {0}")]
    TooFewSamples(usize),
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("fields with periods {0} and {1} cannot be combined")]
    PeriodMismatch(f64, f64),
    #[error("cannot parse field `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

#[derive(Clone, Debug)]
pub enum FieldKind<T: Real> {
    Constant(T),
    /// `offset + amplitude · cos²(π (x / period + phase))`.
    CosineSquared { offset: T, amplitude: T, phase: T },
    Spline(Arc<PeriodicSpline<T>>),
    Sampled(Arc<SampledField<T>>),
    Composite(Arc<Expr<T>>),
}

/// Pointwise combinations of fields.
#[derive(Clone, Debug)]
pub enum Expr<T: Real> {
    Add(PeriodicField<T>, PeriodicField<T>),
    Sub(PeriodicField<T>, PeriodicField<T>),
    Mul(PeriodicField<T>, PeriodicField<T>),
    Div(PeriodicField<T>, PeriodicField<T>),
    Scale(PeriodicField<T>, T),
    Offset(PeriodicField<T>, T),
    Exp(PeriodicField<T>),
    Ln(PeriodicField<T>),
    Powf(PeriodicField<T>, T),
    Derivative(PeriodicField<T>, usize),
    /// `f(x + shift)`.
    Shift(PeriodicField<T>, T),
    /// `f(x · factor)`; the result has period `period(f) / factor`.
    Dilate(PeriodicField<T>, T),
}

/// A real function with a declared positive period.
#[derive(Clone, Debug)]
pub struct PeriodicField<T: Real> {
    kind: FieldKind<T>,
    period: T,
}

impl<T: Real> PeriodicField<T> {
    pub fn constant(value: T) -> Self {
        Self {
            kind: FieldKind::Constant(value),
            period: T::one(),
        }
    }

    /// `offset + amplitude · cos²(π (x + phase))` on period 1.
    pub fn cos2(offset: T, amplitude: T, phase: T) -> Self {
        Self {
            kind: FieldKind::CosineSquared { offset, amplitude, phase },
            period: T::one(),
        }
    }

    /// Uniformly sampled values over one period.
    pub fn sampled(values: Vec<T>, period: T) -> Result<Self, FieldError> {
        check_period(period)?;
        if values.len() < MIN_SAMPLES {
            return Err(FieldError::TooFewSamples(values.len()));
        }
        Ok(Self {
            kind: FieldKind::Sampled(Arc::new(SampledField::new(values, period))),
            period,
        })
    }

    /// Periodic cubic spline through equally spaced knots (one period of
    /// values, seam value not repeated).
    pub fn spline(knots: &[T], period: T) -> Result<Self, FieldError> {
        check_period(period)?;
        if knots.len() < 3 {
            return Err(FieldError::ControlCount {
                expected: 3,
                got: knots.len(),
            });
        }
        Ok(Self {
            kind: FieldKind::Spline(Arc::new(PeriodicSpline::new(knots, period))),
            period,
        })
    }

    fn composite(expr: Expr<T>, period: T) -> Self {
        Self {
            kind: FieldKind::Composite(Arc::new(expr)),
            period,
        }
    }

    pub fn kind(&self) -> &FieldKind<T> {
        &self.kind
    }

    pub fn period(&self) -> T {
        self.period
    }

    /// True when the field is a `Constant` (no scan is performed).
    pub fn as_constant(&self) -> Option<T> {
        match self.kind {
            FieldKind::Constant(c) => Some(c),
            _ => None,
        }
    }

    fn reduce(&self, x: T) -> T {
        let p = self.period;
        let y = x - (x / p).floor() * p;
        if y >= p {
            T::zero()
        } else {
            y
        }
    }

    /// Value and derivatives up to order 4 at `x`.
    pub fn jet(&self, x: T) -> Jet<T> {
        match &self.kind {
            FieldKind::Constant(c) => Jet::constant(*c),
            FieldKind::CosineSquared { offset, amplitude, phase } => {
                let pi = T::PI();
                let half = T::lit(0.5);
                let theta = T::lit(2.0) * pi * (x / self.period + *phase);
                let w = T::lit(2.0) * pi / self.period;
                let a = *amplitude * half;
                let (s, c) = theta.sin_cos();
                Jet([
                    *offset + a + a * c,
                    -a * w * s,
                    -a * w * w * c,
                    a * w * w * w * s,
                    a * w * w * w * w * c,
                ])
            }
            FieldKind::Spline(s) => s.jet(self.reduce(x)),
            FieldKind::Sampled(s) => s.jet(self.reduce(x)),
            FieldKind::Composite(e) => match e.as_ref() {
                Expr::Add(a, b) => a.jet(x) + b.jet(x),
                Expr::Sub(a, b) => a.jet(x) - b.jet(x),
                Expr::Mul(a, b) => a.jet(x) * b.jet(x),
                Expr::Div(a, b) => a.jet(x).div(&b.jet(x)),
                Expr::Scale(a, s) => a.jet(x).scale(*s),
                Expr::Offset(a, c) => {
                    let mut j = a.jet(x);
                    j.0[0] = j.0[0] + *c;
                    j
                }
                Expr::Exp(a) => a.jet(x).exp(),
                Expr::Ln(a) => a.jet(x).ln(),
                Expr::Powf(a, p) => a.jet(x).powf(*p),
                Expr::Derivative(a, k) => a.jet(x).shifted(*k),
                Expr::Shift(a, w) => a.jet(x + *w),
                Expr::Dilate(a, f) => a.jet(x * *f).dilated(*f),
            },
        }
    }

    pub fn eval(&self, x: T) -> T {
        match &self.kind {
            FieldKind::Constant(c) => *c,
            FieldKind::CosineSquared { offset, amplitude, phase } => {
                let c = (T::PI() * (x / self.period + *phase)).cos();
                *offset + *amplitude * c * c
            }
            FieldKind::Composite(e) => match e.as_ref() {
                Expr::Add(a, b) => a.eval(x) + b.eval(x),
                Expr::Sub(a, b) => a.eval(x) - b.eval(x),
                Expr::Mul(a, b) => a.eval(x) * b.eval(x),
                Expr::Div(a, b) => a.eval(x) / b.eval(x),
                Expr::Scale(a, s) => a.eval(x) * *s,
                Expr::Offset(a, c) => a.eval(x) + *c,
                Expr::Exp(a) => a.eval(x).exp(),
                Expr::Ln(a) => a.eval(x).ln(),
                Expr::Powf(a, p) => a.eval(x).powf(*p),
                Expr::Shift(a, w) => a.eval(x + *w),
                Expr::Dilate(a, f) => a.eval(x * *f),
                Expr::Derivative(..) => self.jet(x).value(),
            },
            _ => self.jet(x).value(),
        }
    }

    /// First or second derivative as a field. Closed-form kinds stay
    /// closed-form; sampled data are differenced with 4th-order stencils.
    pub fn derivative(&self, order: usize) -> Result<Self, FieldError> {
        if order != 1 && order != 2 {
            return Err(FieldError::InvalidOrder(order));
        }
        Ok(match &self.kind {
            FieldKind::Constant(_) => Self::constant(T::zero()).with_period_unchecked(self.period),
            FieldKind::CosineSquared { amplitude, phase, .. } => {
                let pi = T::PI();
                let w = pi / self.period;
                let (offset, amplitude, phase) = if order == 1 {
                    // -(aπ/L) sin 2πθ
                    (*amplitude * w, -T::lit(2.0) * *amplitude * w, *phase - T::lit(0.25))
                } else {
                    // -(2aπ²/L²) cos 2πθ
                    let c = T::lit(2.0) * *amplitude * w * w;
                    (c, -T::lit(2.0) * c, *phase)
                };
                Self {
                    kind: FieldKind::CosineSquared { offset, amplitude, phase },
                    period: self.period,
                }
            }
            FieldKind::Sampled(s) => {
                let h = self.period / T::from_usize_lossy(s.len());
                let table = if order == 1 {
                    sampled::first_difference(s.values(), h)
                } else {
                    sampled::second_difference(s.values(), h)
                };
                Self {
                    kind: FieldKind::Sampled(Arc::new(SampledField::new(table, self.period))),
                    period: self.period,
                }
            }
            FieldKind::Composite(e) => match e.as_ref() {
                Expr::Derivative(inner, k) => Self::composite(Expr::Derivative(inner.clone(), k + order), self.period),
                _ => Self::composite(Expr::Derivative(self.clone(), order), self.period),
            },
            FieldKind::Spline(_) => Self::composite(Expr::Derivative(self.clone(), order), self.period),
        })
    }

    /// `x ↦ field(x + ω)`.
    pub fn phase_shift(&self, omega: T) -> Self {
        match &self.kind {
            FieldKind::Constant(_) => self.clone(),
            FieldKind::CosineSquared { offset, amplitude, phase } => Self {
                kind: FieldKind::CosineSquared {
                    offset: *offset,
                    amplitude: *amplitude,
                    phase: *phase + omega / self.period,
                },
                period: self.period,
            },
            _ => Self::composite(Expr::Shift(self.clone(), omega), self.period),
        }
    }

    /// `x ↦ field(x · period / new_period)`, a field of period `new_period`.
    pub fn rescale_period(&self, new_period: T) -> Result<Self, FieldError> {
        check_period(new_period)?;
        Ok(match &self.kind {
            FieldKind::Constant(_) | FieldKind::CosineSquared { .. } => Self {
                kind: self.kind.clone(),
                period: new_period,
            },
            _ => Self::composite(Expr::Dilate(self.clone(), self.period / new_period), new_period),
        })
    }

    fn with_period_unchecked(mut self, period: T) -> Self {
        self.period = period;
        self
    }

    fn combine(&self, other: &Self, build: fn(Self, Self) -> Expr<T>) -> Self {
        let period = self.period.max(other.period);
        Self::composite(build(self.clone(), other.clone()), period)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FieldError> {
        same_period(self, other)?;
        Ok(self.combine(other, Expr::Add))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, FieldError> {
        same_period(self, other)?;
        Ok(self.combine(other, Expr::Sub))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, FieldError> {
        same_period(self, other)?;
        Ok(self.combine(other, Expr::Mul))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, FieldError> {
        same_period(self, other)?;
        Ok(self.combine(other, Expr::Div))
    }

    pub fn scaled(&self, s: T) -> Self {
        match self.kind {
            FieldKind::Constant(c) => Self::constant(c * s).with_period_unchecked(self.period),
            _ => Self::composite(Expr::Scale(self.clone(), s), self.period),
        }
    }

    pub fn offset_by(&self, c: T) -> Self {
        match self.kind {
            FieldKind::Constant(v) => Self::constant(v + c).with_period_unchecked(self.period),
            FieldKind::CosineSquared { offset, amplitude, phase } => Self {
                kind: FieldKind::CosineSquared {
                    offset: offset + c,
                    amplitude,
                    phase,
                },
                period: self.period,
            },
            _ => Self::composite(Expr::Offset(self.clone(), c), self.period),
        }
    }

    pub fn exp(&self) -> Self {
        Self::composite(Expr::Exp(self.clone()), self.period)
    }

    pub fn ln(&self) -> Self {
        Self::composite(Expr::Ln(self.clone()), self.period)
    }

    pub fn powf(&self, p: T) -> Self {
        match self.kind {
            FieldKind::Constant(c) => Self::constant(c.powf(p)).with_period_unchecked(self.period),
            _ => Self::composite(Expr::Powf(self.clone(), p), self.period),
        }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(T::lit(0.5))
    }

    /// Values on the uniform grid `x_i = i · period / n`.
    pub fn sample(&self, n: usize) -> Vec<T> {
        let h = self.period / T::from_usize_lossy(n);
        (0..n).map(|i| self.eval(h * T::from_usize_lossy(i))).collect()
    }

    /// Minimum and maximum over a uniform scan of `n` points.
    pub fn scan_bounds(&self, n: usize) -> (T, T) {
        self.sample(n)
            .into_iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Errors unless every scanned value is at least `floor`.
    pub fn check_positive(&self, floor: T) -> Result<(), FieldError> {
        let h = self.period / T::from_usize_lossy(POSITIVITY_SCAN);
        for i in 0..POSITIVITY_SCAN {
            let x = h * T::from_usize_lossy(i);
            let v = self.eval(x);
            if !(v >= floor) {
                return Err(FieldError::NonPositive {
                    x: x.to_f64_lossy(),
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// Checks the diffusion-coefficient positivity floor.
    pub fn check_diffusion(&self) -> Result<(), FieldError> {
        self.check_positive(T::lit(POSITIVITY_FLOOR))
    }

    /// `∫_0^period f`.
    pub fn integral(&self) -> T {
        quadrature::integrate_period(|x| self.eval(x), self.period)
    }

    /// Arithmetic mean over one period.
    pub fn mean(&self) -> T {
        self.integral() / self.period
    }
}

fn check_period<T: Real>(period: T) -> Result<(), FieldError> {
    if period > T::zero() && period.is_finite() {
        Ok(())
    } else {
        Err(FieldError::InvalidPeriod(period.to_f64_lossy()))
    }
}

fn same_period<T: Real>(a: &PeriodicField<T>, b: &PeriodicField<T>) -> Result<(), FieldError> {
    // constants are compatible with any period
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Ok(());
    }
    let tol = T::lit(1e-12) * a.period.max(b.period);
    if (a.period - b.period).abs() <= tol {
        Ok(())
    } else {
        Err(FieldError::PeriodMismatch(a.period.to_f64_lossy(), b.period.to_f64_lossy()))
    }
}

macro_rules! field_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl<T: Real> $trait for &PeriodicField<T> {
            type Output = PeriodicField<T>;
            /// Panics when the operands have different periods.
            fn $method(self, rhs: Self) -> PeriodicField<T> {
                self.$try(rhs).expect("fields must share a period")
            }
        }
    };
}

field_binop!(Add, add, try_add);
field_binop!(Sub, sub, try_sub);
field_binop!(Mul, mul, try_mul);
field_binop!(Div, div, try_div);

/// `(mean of f^{-p})^{-1/p}`, the power mean of order `-p`. For `p = 1` this
/// is the harmonic mean; `p = 0` gives the geometric mean.
pub fn power_harmonic_mean<T: Real>(field: &PeriodicField<T>, p: T) -> Result<T, FieldError> {
    field.check_positive(T::min_positive_value())?;
    if let Some(c) = field.as_constant() {
        return Ok(c);
    }
    if p == T::zero() {
        let log_mean = quadrature::integrate_period(|x| field.eval(x).ln(), field.period()) / field.period();
        return Ok(log_mean.exp());
    }
    let mean = quadrature::integrate_period(|x| field.eval(x).powf(-p), field.period()) / field.period();
    Ok(mean.powf(-T::one() / p))
}

/// `(mean of D^{-1/2})^{-1}`, the harmonic mean of `√D`.
pub fn sqrt_harmonic_mean<T: Real>(d: &PeriodicField<T>) -> Result<T, FieldError> {
    d.check_positive(T::min_positive_value())?;
    if let Some(c) = d.as_constant() {
        return Ok(c.sqrt());
    }
    let mean = quadrature::integrate_period(|x| d.eval(x).sqrt().recip(), d.period()) / d.period();
    Ok(mean.recip())
}

/// Spline control points sit at `x ∈ {0, 1/3, 2/3, 1}`.
pub const SPLINE_CONTROLS: usize = 4;
/// Open interval the spline control values must lie in.
pub const SPLINE_BOUNDS: (f64, f64) = (0.1, 1.0);

/// C² periodic cubic spline through four control values at `0, 1/3, 2/3, 1`
/// (first equal to last), each inside `(0.1, 1)`.
pub fn build_periodic_spline<T: Real>(control: &[T]) -> Result<PeriodicField<T>, FieldError> {
    if control.len() != SPLINE_CONTROLS {
        return Err(FieldError::ControlCount {
            expected: SPLINE_CONTROLS,
            got: control.len(),
        });
    }
    if control[0] != control[3] {
        return Err(FieldError::SeamMismatch {
            first: control[0].to_f64_lossy(),
            last: control[3].to_f64_lossy(),
        });
    }
    let (lo, hi) = SPLINE_BOUNDS;
    for (index, v) in control.iter().enumerate() {
        let v = v.to_f64_lossy();
        if !(v > lo && v < hi) {
            return Err(FieldError::ControlOutOfRange { index, value: v, lo, hi });
        }
    }
    let field = PeriodicField::spline(&control[..3], T::one())?;
    field.check_diffusion()?;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cos2() -> PeriodicField<f64> {
        PeriodicField::<f64>::cos2(0.1, 1.0, 0.0)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(PeriodicField::<f64>::constant(1.0).eval(0.37), 1.0);
        assert!((cos2().eval(0.0) - 1.1).abs() < 1e-15);
        assert!((cos2().eval(1.25) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let c = PeriodicField::<f64>::constant(3.0).derivative(1).unwrap();
        assert_eq!(c.as_constant(), Some(0.0));
        assert!(cos2().derivative(1).unwrap().eval(0.0).abs() < 1e-14);
        let d2 = cos2().derivative(2).unwrap().eval(0.0);
        assert!((d2 + 2.0 * PI * PI).abs() < 1e-12);
        assert!((d2 + 19.7392).abs() < 1e-4);
        assert_eq!(cos2().derivative(3).unwrap_err(), FieldError::InvalidOrder(3));
        assert_eq!(cos2().derivative(0).unwrap_err(), FieldError::InvalidOrder(0));
    }

    #[test]
    fn sampled_derivative_is_fourth_order_table() {
        let n = 128;
        let f = PeriodicField::<f64>::sampled(cos2().sample(n), 1.0).unwrap();
        let d1 = f.derivative(1).unwrap();
        let exact = cos2().derivative(1).unwrap();
        for i in 0..n {
            let x = i as f64 / n as f64;
            assert!((d1.eval(x) - exact.eval(x)).abs() < 1e-4);
        }
        assert_eq!(
            PeriodicField::<f64>::sampled(vec![1.0; 7], 1.0).unwrap_err(),
            FieldError::TooFewSamples(7)
        );
    }

    #[test]
    fn repeated_first_derivative_matches_second() {
        let f = PeriodicField::<f64>::cos2(0.3, -0.7, 0.17);
        let dd = f.derivative(1).unwrap().derivative(1).unwrap();
        let d2 = f.derivative(2).unwrap();
        for i in 0..256 {
            let x = i as f64 / 256.0;
            assert!((dd.eval(x) - d2.eval(x)).abs() < 1e-6);
        }
        // composite path too
        let g = f.exp();
        let gdd = g.derivative(1).unwrap().derivative(1).unwrap();
        let gd2 = g.derivative(2).unwrap();
        for i in 0..256 {
            let x = i as f64 / 256.0;
            assert!((gdd.eval(x) - gd2.eval(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn composite_derivatives_match_finite_differences() {
        let d = cos2();
        let r = PeriodicField::<f64>::cos2(0.0, 1.0, 0.3);
        let f = &(&d.sqrt() * &r) / &d.exp();
        let h = 1e-4;
        for &x in &[0.05, 0.31, 0.77] {
            let fd1 = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
            let fd2 = (f.eval(x + h) - 2.0 * f.eval(x) + f.eval(x - h)) / (h * h);
            let j = f.jet(x);
            assert!((j.d(1) - fd1).abs() < 1e-6);
            assert!((j.d(2) - fd2).abs() < 1e-4);
        }
    }

    #[test]
    fn phase_shift_examples() {
        let f = cos2();
        let g = f.phase_shift(0.0);
        let h = f.phase_shift(1.0);
        for i in 0..50 {
            let x = i as f64 * 0.0371;
            assert!((g.eval(x) - f.eval(x)).abs() < 1e-14);
            assert!((h.eval(x) - f.eval(x)).abs() < 1e-12);
        }
        let c = PeriodicField::<f64>::cos2(0.0, 1.0, 0.0).phase_shift(0.5);
        assert!(c.eval(0.0).abs() < 1e-15);

        let s = build_periodic_spline::<f64>(&[0.2, 0.8, 0.3, 0.2]).unwrap();
        let ss = s.phase_shift(0.25);
        assert!((ss.eval(0.1) - s.eval(0.35)).abs() < 1e-14);
    }

    #[test]
    fn harmonic_means() {
        assert_eq!(sqrt_harmonic_mean(&PeriodicField::<f64>::constant(4.0)).unwrap(), 2.0);
        // exp(sin 2πx) = exp(cos2(-1, 2, -1/4))
        let e = PeriodicField::<f64>::cos2(-1.0, 2.0, -0.25).exp();
        let hm = power_harmonic_mean(&e, 1.0).unwrap();
        assert!((hm - 0.789_848_314_825_111_97).abs() < 1e-10);
        let vh = sqrt_harmonic_mean(&cos2()).unwrap();
        assert!((vh - 0.628_078_225_336_670_68).abs() / vh < 1e-10);
        assert!(matches!(
            sqrt_harmonic_mean(&PeriodicField::<f64>::cos2(-0.5, 1.0, 0.0)),
            Err(FieldError::NonPositive { .. })
        ));
    }

    #[test]
    fn geometric_mean_limit() {
        let e = PeriodicField::<f64>::cos2(-1.0, 2.0, -0.25).exp();
        // mean of sin(2πx) is zero
        assert!((power_harmonic_mean(&e, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spline_examples() {
        let flat = build_periodic_spline::<f64>(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!((flat.eval(0.123) - 0.5).abs() < 1e-15);
        let s = build_periodic_spline::<f64>(&[0.2, 0.8, 0.8, 0.2]).unwrap();
        assert!((s.eval(0.0) - 0.2).abs() < 1e-12);
        assert!((s.eval(1.0 / 3.0) - 0.8).abs() < 1e-12);
        assert!((s.eval(2.0 / 3.0) - 0.8).abs() < 1e-12);
        assert!((s.eval(1.0) - 0.2).abs() < 1e-12);

        assert!(matches!(
            build_periodic_spline::<f64>(&[0.2, 0.8, 0.8, 0.3]),
            Err(FieldError::SeamMismatch { .. })
        ));
        assert!(matches!(
            build_periodic_spline::<f64>(&[0.2, 1.0, 0.8, 0.2]),
            Err(FieldError::ControlOutOfRange { index: 1, .. })
        ));
        assert!(matches!(
            build_periodic_spline::<f64>(&[0.2, 0.8, 0.2]),
            Err(FieldError::ControlCount { .. })
        ));
    }

    #[test]
    fn spline_seam_continuity_by_one_sided_differences() {
        let s = build_periodic_spline::<f64>(&[0.2, 0.8, 0.3, 0.2]).unwrap();
        let h = 1e-4;
        let left1 = (s.eval(1.0) - s.eval(1.0 - h)) / h;
        let right1 = (s.eval(1.0 + h) - s.eval(1.0)) / h;
        assert!((left1 - right1).abs() < 2e-3);
        let j0 = s.jet(0.0);
        let j1 = s.jet(1.0 - 1e-12);
        assert!((j0.d(1) - j1.d(1)).abs() < 1e-6);
        assert!((j0.d(2) - j1.d(2)).abs() < 1e-6);
    }

    #[test]
    fn rescaled_period_keeps_shape() {
        let f = cos2();
        let g = f.rescale_period(2.0).unwrap();
        assert_eq!(g.period(), 2.0);
        assert!((g.eval(0.5) - f.eval(0.25)).abs() < 1e-15);
        assert!((g.jet(0.3).d(1) - 0.5 * f.jet(0.15).d(1)).abs() < 1e-14);
        let s = build_periodic_spline::<f64>(&[0.2, 0.8, 0.3, 0.2]).unwrap().rescale_period(4.0).unwrap();
        assert!((s.eval(4.0 / 3.0) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn jensen_ordering() {
        let f = PeriodicField::<f64>::cos2(0.2, 0.9, 0.1);
        let arith = f.mean();
        let harm = power_harmonic_mean(&f, 1.0).unwrap();
        assert!(arith > harm);
    }

    #[test]
    fn generic_over_f32() {
        let f = PeriodicField::<f32>::cos2(0.1, 1.0, 0.0);
        assert!((f.eval(1.25) - 0.6).abs() < 1e-6);
        let vh = sqrt_harmonic_mean(&f).unwrap();
        assert!((vh - 0.628_078_2).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn closed_form_kinds_are_periodic(x in -5.0f64..5.0, n in -4i32..4, o in 0.1f64..2.0, a in -1.0f64..1.0, w in 0.0f64..1.0) {
            let f = PeriodicField::<f64>::cos2(o, a, w);
            prop_assert!((f.eval(x) - f.eval(x + n as f64)).abs() <= 1e-12);
            let s = build_periodic_spline::<f64>(&[0.2, 0.8, 0.3, 0.2]).unwrap();
            prop_assert!((s.eval(x) - s.eval(x + n as f64)).abs() <= 1e-12);
        }

        #[test]
        fn harmonic_mean_of_constant(c in 0.01f64..50.0, p in -3.0f64..3.0) {
            let f = PeriodicField::<f64>::constant(c);
            prop_assert!((power_harmonic_mean(&f, p).unwrap() - c).abs() <= 1e-12 * c);
        }

        #[test]
        fn spline_interpolates_controls(a in 0.11f64..0.99, b in 0.11f64..0.99, c in 0.11f64..0.99) {
            if let Ok(s) = build_periodic_spline::<f64>(&[a, b, c, a]) {
                prop_assert!((s.eval(0.0) - a).abs() < 1e-12);
                prop_assert!((s.eval(1.0 / 3.0) - b).abs() < 1e-12);
                prop_assert!((s.eval(2.0 / 3.0) - c).abs() < 1e-12);
            }
        }
    }
}
