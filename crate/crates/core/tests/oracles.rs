//! Independent oracles: series and trapezoid quadrature for the golden
//! constants, and a Fourier–Galerkin (Hill) discretization of
//!
//! ```text
//! L ψ = (∂ − λ) D^{1−q} (∂ − λ) (D^q ψ) + r ψ
//! ```
//!
//! for the principal eigenvalue.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use qdiff_core::eigen::k_value;
use qdiff_core::speed::{spreading_speed, stratonovich_speed, Direction};
use qdiff_core::{build_periodic_spline, power_harmonic_mean, sqrt_harmonic_mean, Field};

const V_H: f64 = 0.628_078_225_336_670_683;
const INV_I0_1: f64 = 0.789_848_314_825_111_966;

/// Periodic trapezoid rule; exponentially accurate for analytic integrands.
fn trapezoid(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    (0..n).map(|i| f(i as f64 / n as f64)).sum::<f64>() / n as f64
}

/// `I_0(1) = Σ (1/4)^k / (k!)²`.
fn bessel_i0_at_1() -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        term *= 0.25 / (k as f64 * k as f64);
        sum += term;
    }
    sum
}

#[test]
fn golden_constants_from_independent_quadrature() {
    let v = 1.0 / trapezoid(|x| (0.1 + (PI * x).cos().powi(2)).powf(-0.5), 20000);
    assert!((v - V_H).abs() < 1e-13, "{}", v - V_H);
    assert!((1.0 / bessel_i0_at_1() - INV_I0_1).abs() < 1e-15, "{}", 1.0 / bessel_i0_at_1() - INV_I0_1);
}

#[test]
fn harmonic_means_match_golden_constants() {
    let d = Field::cos2(0.1, 1.0, 0.0);
    assert!((sqrt_harmonic_mean(&d).unwrap() - V_H).abs() < 1e-12);
    let e = Field::cos2(-1.0, 2.0, -0.25).exp();
    assert!((power_harmonic_mean(&e, 1.0).unwrap() - INV_I0_1).abs() < 1e-12);
}

#[test]
fn stratonovich_speed_is_twice_the_harmonic_mean() {
    let d = Field::cos2(0.1, 1.0, 0.0);
    let one = Field::constant(1.0);
    assert!((stratonovich_speed(1.0, &d).unwrap() - 2.0 * V_H).abs() < 1e-12);
    let s = spreading_speed(&one, &d, 0.5, Direction::Right, 1e-8).unwrap();
    assert!((s.c_star / (2.0 * V_H) - 1.0).abs() < 1e-6, "{}", s.c_star);
}

/// Complex Fourier coefficients `f̂_m`, `|m| ≤ 2n`, by trapezoid quadrature.
fn fourier(f: &Field, n: usize) -> Vec<(f64, f64)> {
    let pts = 4096;
    let vals: Vec<f64> = (0..pts).map(|i| f.eval(i as f64 / pts as f64)).collect();
    (0..=4 * n)
        .map(|j| {
            let m = j as f64 - 2.0 * n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in vals.iter().enumerate() {
                let th = -2.0 * PI * m * i as f64 / pts as f64;
                re += v * th.cos();
                im += v * th.sin();
            }
            (re / pts as f64, im / pts as f64)
        })
        .collect()
}

type Cplx = (DMatrix<f64>, DMatrix<f64>);

fn cmul(a: &Cplx, b: &Cplx) -> Cplx {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

/// Multiplication by `f` on modes `−n..=n`.
fn convolution(coef: &[(f64, f64)], n: usize) -> Cplx {
    let size = 2 * n + 1;
    let mut re = DMatrix::zeros(size, size);
    let mut im = DMatrix::zeros(size, size);
    for j in 0..size {
        for k in 0..size {
            let (a, b) = coef[j + 2 * n - k];
            re[(j, k)] = a;
            im[(j, k)] = b;
        }
    }
    (re, im)
}

/// `∂ − λ` on modes `−n..=n`.
fn shifted_derivative(lambda: f64, n: usize) -> Cplx {
    let size = 2 * n + 1;
    let mut re = DMatrix::zeros(size, size);
    let mut im = DMatrix::zeros(size, size);
    for j in 0..size {
        re[(j, j)] = -lambda;
        im[(j, j)] = 2.0 * PI * (j as f64 - n as f64);
    }
    (re, im)
}

/// Principal eigenvalue of the Galerkin matrix: power iteration on
/// `(σ − M)^{-1}` in real block form.
fn hill_eigenvalue(r: &Field, d: &Field, q: f64, lambda: f64, n: usize) -> f64 {
    let dq = fourier(&d.powf(q), n);
    let d1q = fourier(&d.powf(1.0 - q), n);
    let rr = fourier(r, n);
    let p = shifted_derivative(lambda, n);
    let m = cmul(&cmul(&cmul(&p, &convolution(&d1q, n)), &p), &convolution(&dq, n));
    let rc = convolution(&rr, n);
    let (a, b) = (&m.0 + &rc.0, &m.1 + &rc.1);
    let size = 2 * n + 1;
    let sigma = 2.0 + lambda * lambda * 10.0;
    let mut blk = DMatrix::zeros(2 * size, 2 * size);
    for j in 0..size {
        for k in 0..size {
            let shift = if j == k { sigma } else { 0.0 };
            blk[(j, k)] = shift - a[(j, k)];
            blk[(j + size, k + size)] = shift - a[(j, k)];
            blk[(j, k + size)] = b[(j, k)];
            blk[(j + size, k)] = -b[(j, k)];
        }
    }
    let lu = blk.lu();
    let mut x = nalgebra::DVector::from_element(2 * size, 1.0);
    let mut mu = 0.0;
    for _ in 0..500 {
        let y = lu.solve(&x).unwrap();
        let next = y.norm() / x.norm();
        x = &y / y.norm();
        if (next - mu).abs() < 1e-15 * next {
            mu = next;
            break;
        }
        mu = next;
    }
    sigma - 1.0 / mu
}

#[test]
fn eigenvalue_matches_fourier_galerkin_oracle() {
    let r = Field::cos2(0.0, 1.0, 0.0);
    let d = Field::cos2(0.1, 1.0, 0.0);
    for (q, lambda) in [(0.0, 0.0), (0.0, 0.7), (1.0, 0.0), (1.0, 0.5), (0.5, 1.2), (-1.0, 0.3)] {
        let hill = hill_eigenvalue(&r, &d, q, lambda, 48);
        let fd = k_value(&r, &d, q, lambda, 1e-9).unwrap().k;
        assert!((hill - fd).abs() < 1e-7, "q={q} λ={lambda}: hill {hill} fd {fd}");
    }
}

#[test]
fn spline_coefficient_matches_fourier_galerkin_oracle() {
    let r = Field::cos2(0.0, 1.0, 0.25);
    let d = build_periodic_spline(&[0.2, 0.8, 0.3, 0.2]).unwrap();
    for (q, lambda) in [(0.0, 0.4), (1.0, 0.9)] {
        // the spline is only C², so the Fourier tail decays slowly
        let hill = hill_eigenvalue(&r, &d, q, lambda, 96);
        let fd = k_value(&r, &d, q, lambda, 1e-9).unwrap().k;
        assert!((hill - fd).abs() < 1e-5, "q={q} λ={lambda}: hill {hill} fd {fd}");
    }
}

#[test]
fn constant_coefficients_are_exact() {
    let one = Field::constant(1.0);
    for q in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        for lambda in [0.0, 0.5, 2.0] {
            let k = k_value(&one, &one, q, lambda, 1e-10).unwrap().k;
            assert!((k - (1.0 + lambda * lambda)).abs() <= 1e-10);
        }
    }
}
