//! Exact reductions of the q-diffusion eigenproblem, with numerical checks.
//!
//! * Fickian form: `k_q^λ[r; D] = k_0^λ[r − h_q; D]` with
//!   `h_q = −(q/2) D'' + (q²/4) D'²/D`.
//! * Space deformation `y = h(x) = ∫_0^x D^{-1/2}`: `k_q^λ[r; D]` equals the
//!   principal eigenvalue at `μ = λ ⟨√D⟩_H` of
//!   `Φ'' − ((2μ + s P')Φ)' + (R + μ s P' + μ²) Φ` on period `h(1)`, where
//!   `R = r∘h⁻¹`, `P = ln D∘h⁻¹`, `s = 1/2 − q`.
//! * Variational formula, large-diffusion limit and `q → ±∞` limits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{k_value, richardson, EigenError, KValue, PeriodicTridiagonal, WarmStart};
use crate::fields::{find_extrema, FieldError, PeriodicField};
use crate::quadrature;
use crate::scalar::Real;
use crate::speed::{spreading_speed, stratonovich_speed, Direction, SpeedError};

/// Nodes of the tabulated deformation map and of the deformed coefficients.
pub const DEFORM_NODES: usize = 8192;

/// `−(q/2) D'' + (q²/4) D'²/D`.
pub fn hq_correction<T: Real>(d: &PeriodicField<T>, q: T) -> Result<PeriodicField<T>, FieldError> {
    if q == T::zero() || d.as_constant().is_some() {
        return Ok(PeriodicField::constant(T::zero()));
    }
    let d1 = d.derivative(1)?;
    let d2 = d.derivative(2)?;
    let a = d2.scaled(-q / T::lit(2.0));
    let b = (&d1 * &d1).try_div(d)?.scaled(q * q / T::lit(4.0));
    a.try_add(&b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison<T> {
    pub lhs: T,
    pub rhs: T,
    pub gap: T,
}

impl<T: Real> Comparison<T> {
    fn new(lhs: T, rhs: T) -> Self {
        Self {
            lhs,
            rhs,
            gap: (lhs - rhs).abs(),
        }
    }
}

/// `k_q^λ[r; D]` against `k_0^λ[r − h_q; D]`.
pub fn check_fickian_reduction<T: Real>(
    r: &PeriodicField<T>,
    d: &PeriodicField<T>,
    q: T,
    lambda: T,
    tol: T,
) -> Result<Comparison<T>, EigenError> {
    let lhs = k_value(r, d, q, lambda, tol)?.k;
    if q == T::zero() {
        return Ok(Comparison::new(lhs, lhs));
    }
    let shifted = r.try_sub(&hq_correction(d, q)?)?;
    let rhs = k_value(&shifted, d, T::zero(), lambda, tol)?.k;
    Ok(Comparison::new(lhs, rhs))
}

/// Coefficients after the change of variable `y = h(x)`.
#[derive(Clone, Debug)]
pub struct DeformedProblem<T: Real> {
    /// `h` at `x_j = j / DEFORM_NODES` (one period of `D`, endpoint included).
    pub h_table: Vec<T>,
    /// `h(period)`; equals `1 / ⟨√D⟩_H` on a unit period.
    pub new_period: T,
    /// `r∘h⁻¹`.
    pub r: PeriodicField<T>,
    /// `ln D∘h⁻¹`.
    pub p: PeriodicField<T>,
    /// `h⁻¹` at the sample nodes `y_i = i · new_period / DEFORM_NODES`.
    pub inverse_nodes: Vec<T>,
}

impl<T: Real> DeformedProblem<T> {
    /// `1/2 − q`.
    pub fn s_q(q: T) -> T {
        T::lit(0.5) - q
    }

    /// `⟨√D⟩_H` for a unit period.
    pub fn scale(&self) -> T {
        self.new_period.recip()
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// `∫_a^b f` by 5-point Gauss–Legendre.
fn gauss5<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    GAUSS5
        .iter()
        .map(|&(x, w)| T::lit(w) * f(mid + half * T::lit(x)))
        .sum::<T>()
        * half
}

/// Fritsch–Carlson slopes for monotone cubic Hermite interpolation.
fn monotone_slopes<T: Real>(xs: &[T], ys: &[T]) -> Vec<T> {
    let n = xs.len();
    let secants: Vec<T> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
    let mut m = vec![T::zero(); n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        m[i] = if secants[i - 1] * secants[i] <= T::zero() {
            T::zero()
        } else {
            (secants[i - 1] + secants[i]) * T::lit(0.5)
        };
    }
    for i in 0..n - 1 {
        if secants[i] == T::zero() {
            m[i] = T::zero();
            m[i + 1] = T::zero();
            continue;
        }
        let a = m[i] / secants[i];
        let b = m[i + 1] / secants[i];
        let s = a * a + b * b;
        if s > T::lit(9.0) {
            let t = T::lit(3.0) / s.sqrt();
            m[i] = t * a * secants[i];
            m[i + 1] = t * b * secants[i];
        }
    }
    m
}

fn hermite<T: Real>(x0: T, x1: T, y0: T, y1: T, m0: T, m1: T, x: T) -> T {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    (two * t3 - three * t2 + T::one()) * y0 + (t3 - two * t2 + t) * h * m0 + (three * t2 - two * t3) * y1 + (t3 - t2) * h * m1
}

/// Tabulates `h(x) = ∫_0^x D^{-1/2}`, inverts it and samples `R` and `P`
/// on a uniform grid in `y`.
pub fn deform<T: Real>(d: &PeriodicField<T>, r: &PeriodicField<T>) -> Result<DeformedProblem<T>, FieldError> {
    d.check_diffusion()?;
    let period = if d.as_constant().is_some() { r.period() } else { d.period() };
    let n = DEFORM_NODES;
    let dx = period / T::from_usize_lossy(n);
    let w = |x: T| d.eval(x).sqrt().recip();
    let xs: Vec<T> = (0..=n).map(|j| dx * T::from_usize_lossy(j)).collect();
    let mut h_table = Vec::with_capacity(n + 1);
    h_table.push(T::zero());
    for j in 0..n {
        let next = h_table[j] + gauss5(&w, xs[j], xs[j + 1]);
        h_table.push(next);
    }
    let new_period = h_table[n];

    // inverse map: monotone cubic guess, polished by Newton on h(x) = y
    let slopes = monotone_slopes(&h_table, &xs);
    let dy = new_period / T::from_usize_lossy(n);
    let mut inverse_nodes = Vec::with_capacity(n);
    let mut j = 0usize;
    for i in 0..n {
        let y = dy * T::from_usize_lossy(i);
        while j + 1 < n && h_table[j + 1] <= y {
            j += 1;
        }
        let mut x = hermite(h_table[j], h_table[j + 1], xs[j], xs[j + 1], slopes[j], slopes[j + 1], y);
        for _ in 0..4 {
            let hx = h_table[j] + gauss5(&w, xs[j], x);
            let step = (hx - y) * d.eval(x).sqrt();
            x = x - step;
            if step.abs() <= T::epsilon() * period {
                break;
            }
        }
        inverse_nodes.push(x);
    }

    let r_vals: Vec<T> = inverse_nodes.iter().map(|&x| r.eval(x)).collect();
    let p_vals: Vec<T> = inverse_nodes.iter().map(|&x| d.eval(x).ln()).collect();
    Ok(DeformedProblem {
        h_table,
        new_period,
        r: PeriodicField::sampled(r_vals, new_period)?,
        p: PeriodicField::sampled(p_vals, new_period)?,
        inverse_nodes,
    })
}

/// Assembled deformed operator at grid size `n` and parameter `μ`.
pub fn assemble_deformed<T: Real>(problem: &DeformedProblem<T>, q: T, mu: T, n: usize) -> Result<PeriodicTridiagonal<T>, EigenError> {
    let s = DeformedProblem::s_q(q);
    let delta = problem.new_period / T::from_usize_lossy(n);
    let ones = vec![T::one(); n];
    let mut drift = Vec::with_capacity(n);
    let mut zeroth = Vec::with_capacity(n);
    for i in 0..n {
        let y = delta * T::from_usize_lossy(i);
        let jp = problem.p.jet(y);
        let (p1, p2) = (jp.d(1), jp.d(2));
        drift.push(-(T::lit(2.0) * mu + s * p1));
        zeroth.push(problem.r.eval(y) + mu * s * p1 + mu * mu - s * p2);
    }
    PeriodicTridiagonal::from_coefficients(&ones, &drift, &zeroth, delta)
}

/// Principal eigenvalue `k̂_q^μ` of the deformed operator.
pub fn deformed_eigenvalue<T: Real>(problem: &DeformedProblem<T>, q: T, mu: T, tol: T) -> Result<KValue<T>, EigenError> {
    richardson(tol, |n| assemble_deformed(problem, q, mu, n), &mut WarmStart::new())
}

/// `k_q^λ[r; D]` against `k̂_q^{λ ⟨√D⟩_H}`.
pub fn check_deformation<T: Real>(
    r: &PeriodicField<T>,
    d: &PeriodicField<T>,
    q: T,
    lambda: T,
    tol: T,
) -> Result<Comparison<T>, EigenError> {
    let problem = deform(d, r)?;
    let lhs = k_value(r, d, q, lambda, tol)?.k;
    let rhs = deformed_eigenvalue(&problem, q, lambda * problem.scale(), tol)?.k;
    Ok(Comparison::new(lhs, rhs))
}

/// `−∫ D^{1−q} ((D^{q/2} φ)')² + ∫ r φ²` for the trial `φ` rescaled to
/// `∫ φ² = 1`.
pub fn rayleigh_value<T: Real>(r: &PeriodicField<T>, d: &PeriodicField<T>, q: T, phi: &PeriodicField<T>) -> Result<T, FieldError> {
    phi.check_positive(T::min_positive_value())?;
    let period = if d.as_constant().is_some() { phi.period() } else { d.period() };
    let half_q = q * T::lit(0.5);
    let norm = quadrature::integrate_period(
        |x| {
            let v = phi.eval(x);
            v * v
        },
        period,
    );
    let value = quadrature::integrate_period(
        |x| {
            let jd = d.jet(x);
            let jp = phi.jet(x);
            let (dv, d1) = (jd.d(0), jd.d(1));
            let grad = jp.d(1) + half_q * d1 / dv * jp.d(0);
            r.eval(x) * jp.d(0) * jp.d(0) - dv * grad * grad
        },
        period,
    );
    Ok(value / norm)
}

/// Maximizer of [`rayleigh_value`] built from nodal values of a principal
/// eigenfunction `ψ` of `k_q^0`: `φ = D^{q/2} ψ`.
pub fn variational_maximizer<T: Real>(d: &PeriodicField<T>, q: T, psi: &[T], period: T) -> Result<PeriodicField<T>, FieldError> {
    let h = period / T::from_usize_lossy(psi.len());
    let half_q = q * T::lit(0.5);
    let vals = psi
        .iter()
        .enumerate()
        .map(|(i, v)| *v * d.eval(h * T::from_usize_lossy(i)).powf(half_q))
        .collect();
    PeriodicField::sampled(vals, period)
}

/// `∫ r D^{-q} / ∫ D^{-q}`, the limit of `k_q^0[r; B D]` as `B → ∞`. It is
/// also the lower bound `⟨D^q⟩_H ∫ r / D^q` for every `B`.
pub fn large_b_limit<T: Real>(r: &PeriodicField<T>, d: &PeriodicField<T>, q: T) -> Result<T, FieldError> {
    d.check_positive(T::min_positive_value())?;
    let period = if d.as_constant().is_some() { r.period() } else { d.period() };
    let num = quadrature::integrate_period(|x| r.eval(x) * d.eval(x).powf(-q), period);
    let den = quadrature::integrate_period(|x| d.eval(x).powf(-q), period);
    Ok(num / den)
}

/// `(max r over local minima of D, max r over local maxima of D)`: the limits
/// of `k_q^0` as `q → +∞` and `q → −∞`. `None` when `D` has a degenerate
/// critical point.
pub fn persistence_limits<T: Real>(r: &PeriodicField<T>, d: &PeriodicField<T>) -> Option<(T, T)> {
    let ext = find_extrema(d, 1024);
    if !ext.is_nondegenerate() || ext.minima.is_empty() || ext.maxima.is_empty() {
        return None;
    }
    let best = |set: &[crate::fields::Extremum<T>]| set.iter().map(|e| r.eval(e.x)).fold(T::neg_infinity(), T::max);
    Some((best(&ext.minima), best(&ext.maxima)))
}

/// Persistence eigenvalues for the two growth rates built from `h_q`:
/// `r = 1 + h_q` (where `k_q^0 < k_0^0`) and `r = −a h_q` (where
/// `k_q^0 > k_0^0` for large `a`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstructions<T> {
    pub plus_kq: T,
    pub plus_k0: T,
    pub minus_kq: T,
    pub minus_k0: T,
}

impl<T: Real> LemmaConstructions<T> {
    /// `k_0^0 − k_q^0` for `r = 1 + h_q`.
    pub fn plus_margin(&self) -> T {
        self.plus_k0 - self.plus_kq
    }

    /// `k_q^0 − k_0^0` for `r = −a h_q`.
    pub fn minus_margin(&self) -> T {
        self.minus_kq - self.minus_k0
    }
}

pub fn lemma_constructions<T: Real>(d: &PeriodicField<T>, q: T, a: T, tol: T) -> Result<LemmaConstructions<T>, EigenError> {
    let hq = hq_correction(d, q)?;
    let plus = hq.offset_by(T::one());
    let minus = hq.scaled(-a);
    Ok(LemmaConstructions {
        plus_kq: k_value(&plus, d, q, T::zero(), tol)?.k,
        plus_k0: k_value(&plus, d, T::zero(), T::zero(), tol)?.k,
        minus_kq: k_value(&minus, d, q, T::zero(), tol)?.k,
        minus_k0: k_value(&minus, d, T::zero(), T::zero(), tol)?.k,
    })
}

/// One line of the verification table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub case: String,
    pub gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(identity: &str, case: String, gap: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.to_string(),
            case,
            gap,
            tolerance,
            passed: gap.is_finite() && gap <= tolerance,
        }
    }

    fn failed(identity: &str, case: String, tolerance: f64, err: impl std::fmt::Display) -> Self {
        Self {
            identity: identity.to_string(),
            case: format!("{case} [{err}]"),
            gap: f64::NAN,
            tolerance,
            passed: false,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }
}

/// `(label, r, D)` pairs used by the default suite.
pub fn identity_presets() -> Vec<(&'static str, PeriodicField<f64>, PeriodicField<f64>)> {
    vec![
        (
            "r=cos2(pi x);D=0.1+cos2(pi x)",
            PeriodicField::cos2(0.0, 1.0, 0.0),
            PeriodicField::cos2(0.1, 1.0, 0.0),
        ),
        (
            "r=cos2(pi(x+1/4));D=exp(sin 2pi x)",
            PeriodicField::cos2(0.0, 1.0, 0.25),
            PeriodicField::cos2(-1.0, 2.0, -0.25).exp(),
        ),
    ]
}

/// Tolerances of the default verification suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteTolerances {
    /// Eigenvalue tolerance passed to every solve.
    pub eigen: f64,
    pub fickian: f64,
    pub deformation: f64,
    pub large_b: f64,
    pub q_limits: f64,
    pub left_right: f64,
    pub stratonovich: f64,
    pub lemma_margin: f64,
    pub rayleigh: f64,
}

impl Default for SuiteTolerances {
    fn default() -> Self {
        Self {
            eigen: 1e-8,
            fickian: 1e-6,
            deformation: 1e-5,
            large_b: 0.01,
            q_limits: 0.05,
            left_right: 1e-6,
            stratonovich: 1e-4,
            lemma_margin: 1e-4,
            rayleigh: 1e-6,
        }
    }
}

enum Case {
    Fickian(usize, f64, f64),
    Deformation(usize, f64, f64),
    LargeB(f64),
    QLimit(f64),
    LeftRight(usize, f64),
    Stratonovich,
    Lemma,
    Rayleigh(usize, f64),
}

/// Runs the identity suite; cases are evaluated in parallel and returned
/// in a fixed order.
pub fn verify_suite(tol: &SuiteTolerances) -> Vec<IdentityCheck> {
    let mut cases = Vec::new();
    for p in 0..2 {
        for q in [-2.0, 1.0, 3.0] {
            for lam in [0.0, 0.5] {
                cases.push(Case::Fickian(p, q, lam));
            }
        }
    }
    for p in 0..2 {
        for q in [-2.0, 1.0, 3.0] {
            for lam in [0.0, 0.5] {
                cases.push(Case::Deformation(p, q, lam));
            }
        }
    }
    cases.extend([-1.0, 1.0, 2.0].map(Case::LargeB));
    cases.extend([40.0, -40.0].map(Case::QLimit));
    for p in 0..2 {
        for q in [0.0, 1.0, 2.5] {
            cases.push(Case::LeftRight(p, q));
        }
    }
    cases.push(Case::Stratonovich);
    cases.push(Case::Lemma);
    for p in 0..2 {
        for q in [0.0, 1.0] {
            cases.push(Case::Rayleigh(p, q));
        }
    }
    cases.par_iter().flat_map_iter(|c| run_case(c, tol)).collect()
}

fn run_case(case: &Case, tol: &SuiteTolerances) -> Vec<IdentityCheck> {
    let presets = identity_presets();
    let cos_r = PeriodicField::cos2(0.0, 1.0, 0.0);
    let cos_d = PeriodicField::cos2(0.1, 1.0, 0.0);
    match *case {
        Case::Fickian(p, q, lam) => {
            let (label, r, d) = &presets[p];
            let name = format!("{label};q={q};lambda={lam}");
            vec![match check_fickian_reduction(r, d, q, lam, tol.eigen) {
                Ok(c) => IdentityCheck::new("fickian_reduction", name, c.gap, tol.fickian),
                Err(e) => IdentityCheck::failed("fickian_reduction", name, tol.fickian, e),
            }]
        }
        Case::Deformation(p, q, lam) => {
            let (label, r, d) = &presets[p];
            let name = format!("{label};q={q};lambda={lam}");
            vec![match check_deformation(r, d, q, lam, tol.eigen) {
                Ok(c) => IdentityCheck::new("space_deformation", name, c.gap, tol.deformation),
                Err(e) => IdentityCheck::failed("space_deformation", name, tol.deformation, e),
            }]
        }
        Case::LargeB(q) => {
            let name = format!("r=cos2(pi x);D=1000*(0.1+cos2(pi x));q={q}");
            let big = cos_d.scaled(1000.0);
            let res = large_b_limit(&cos_r, &cos_d, q)
                .map_err(EigenError::from)
                .and_then(|lim| Ok((lim, k_value(&cos_r, &big, q, 0.0, tol.eigen)?.k)));
            vec![match res {
                Ok((lim, k)) => IdentityCheck::new("large_diffusion_limit", name, (k - lim).abs(), tol.large_b),
                Err(e) => IdentityCheck::failed("large_diffusion_limit", name, tol.large_b, e),
            }]
        }
        Case::QLimit(q) => {
            let name = format!("r=cos2(pi x);D=0.1+cos2(pi x);q={q}");
            let Some((plus, minus)) = persistence_limits(&cos_r, &cos_d) else {
                return vec![IdentityCheck::failed("q_limit", name, tol.q_limits, "degenerate extrema")];
            };
            let target = if q > 0.0 { plus } else { minus };
            vec![match k_value(&cos_r, &cos_d, q, 0.0, 1e-6) {
                Ok(k) => IdentityCheck::new("q_limit", name, (k.k - target).abs(), tol.q_limits),
                Err(e) => IdentityCheck::failed("q_limit", name, tol.q_limits, e),
            }]
        }
        Case::LeftRight(p, q) => {
            let (label, r, d) = &presets[p];
            let name = format!("{label};q={q}");
            let res = spreading_speed(r, d, q, Direction::Right, 1e-7)
                .and_then(|a| Ok((a.c_star, spreading_speed(r, d, q, Direction::Left, 1e-7)?.c_star)));
            vec![match res {
                Ok((a, b)) => IdentityCheck::new("left_right_speed", name, (a - b).abs() / a, tol.left_right),
                Err(e) => IdentityCheck::failed("left_right_speed", name, tol.left_right, e),
            }]
        }
        Case::Stratonovich => {
            let name = "r=1;D=0.1+cos2(pi x);q=0.5".to_string();
            let one = PeriodicField::constant(1.0);
            let res = stratonovich_speed(1.0, &cos_d)
                .and_then(|want| Ok((want, spreading_speed(&one, &cos_d, 0.5, Direction::Right, 1e-6)?.c_star)));
            vec![match res {
                Ok((want, got)) => IdentityCheck::new("stratonovich_speed", name, (got - want).abs() / want, tol.stratonovich),
                Err(e) => IdentityCheck::failed("stratonovich_speed", name, tol.stratonovich, e),
            }]
        }
        Case::Lemma => {
            let name = "D=0.1+cos2(pi x);q=1".to_string();
            match lemma_constructions(&cos_d, 1.0, 50.0, tol.eigen) {
                Ok(l) => vec![
                    // gap is the shortfall below the required margin
                    IdentityCheck::new(
                        "lemma_r_plus_hq",
                        format!("{name};k0-kq={:.6e}", l.plus_margin()),
                        (tol.lemma_margin - l.plus_margin()).max(0.0),
                        0.0,
                    ),
                    IdentityCheck::new(
                        "lemma_r_minus_a_hq",
                        format!("{name};a=50;kq-k0={:.6e}", l.minus_margin()),
                        (tol.lemma_margin - l.minus_margin()).max(0.0),
                        0.0,
                    ),
                ],
                Err(e) => vec![IdentityCheck::failed("lemma_constructions", name, 0.0, e)],
            }
        }
        Case::Rayleigh(p, q) => {
            let (label, r, d) = &presets[p];
            let name = format!("{label};q={q}");
            let res = (|| -> Result<f64, SpeedError> {
                let spec = crate::eigen::OperatorSpec::new(r, d, q, 0.0, 4096);
                let m = crate::eigen::assemble(&spec)?;
                let e = crate::eigen::principal_eigenpair(&m, None)?;
                let phi = variational_maximizer(d, q, &e.phi, d.period())?;
                let k = k_value(r, d, q, 0.0, tol.eigen)?.k;
                Ok((rayleigh_value(r, d, q, &phi)? - k).abs())
            })();
            vec![match res {
                Ok(gap) => IdentityCheck::new("rayleigh_at_eigenfunction", name, gap, tol.rayleigh),
                Err(e) => IdentityCheck::failed("rayleigh_at_eigenfunction", name, tol.rayleigh, e),
            }]
        }
    }
}
