//! Composite Simpson quadrature with one Richardson step.

use crate::scalar::Real;

/// Default number of Simpson intervals on one period.
pub const DEFAULT_INTERVALS: usize = 4096;

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even interval count");
    let h = (b - a) / T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + h * T::from_usize_lossy(i);
        acc = acc + if i % 2 == 1 { four * f(x) } else { two * f(x) };
    }
    acc * h / T::lit(3.0)
}

/// `∫_a^b f` from Simpson on `n` and `2n` intervals, Richardson-combined.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    let coarse = simpson(&f, a, b, n);
    let fine = simpson(&f, a, b, 2 * n);
    fine + (fine - coarse) / T::lit(15.0)
}

/// Integral over one period starting at zero, at the default resolution.
pub fn integrate_period<T: Real, F: Fn(T) -> T>(f: F, period: T) -> T {
    integrate(f, T::zero(), period, DEFAULT_INTERVALS)
}

/// Trapezoid rule on uniform periodic samples (spectrally accurate for
/// smooth periodic data).
pub fn periodic_trapezoid<T: Real>(samples: &[T], period: T) -> T {
    let n = T::from_usize_lossy(samples.len());
    samples.iter().copied().sum::<T>() * period / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = simpson(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 2);
        assert!((v - 0.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_cosine_square_mean() {
        let v = integrate_period(|x: f64| (std::f64::consts::PI * x).cos().powi(2), 1.0);
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_on_samples() {
        let n = 64;
        let s: Vec<f64> = (0..n).map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin().exp()).collect();
        // ∫ e^{sin 2πx} = I0(1)
        assert!((periodic_trapezoid(&s, 1.0) - 1.266_065_877_752_008_4).abs() < 1e-14);
    }
}
