//! Explicit time stepping of
//!
//! ```text
//! u_t = (D^{1-q} (D^q u)_x)_x + u (r − u)
//! ```
//!
//! on `[0, L]` with zero flux at `x = 0` and `u = 0` at `x = L`, and
//! level-set tracking of the invading front.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{FieldError, PeriodicField};
use crate::scalar::Real;

/// Values below this are treated as rounding and clipped to zero.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;
/// The front must stay this many periods away from the right boundary.
pub const BOUNDARY_MARGIN_PERIODS: f64 = 5.0;
/// Time between front-position samples.
pub const FRONT_SAMPLE_INTERVAL: f64 = 0.005;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("front reached x = {position} at t = {t}, within {BOUNDARY_MARGIN_PERIODS} periods of the boundary; enlarge the domain")]
    DomainTooShort { t: f64, position: f64 },
    #[error("front receded from {from} to {to} at t = {t} after the transient")]
    NonMonotone { t: f64, from: f64, to: f64 },
    #[error("solution became {value} at x = {x}, t = {t}")]
    Blowup { t: f64, x: f64, value: f64 },
    #[error("too few front samples after the transient ({0}); increase t_final")]
    TooFewSamples(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug)]
pub struct SimConfig<T: Real> {
    pub r: PeriodicField<T>,
    pub d: PeriodicField<T>,
    pub q: T,
    /// Length of the domain (a multiple of the period).
    pub domain_length: T,
    pub dx: T,
    pub cfl_safety: T,
    pub t_final: T,
    pub level: T,
    pub transient_fraction: T,
    /// Initial datum is 1 on `[0, initial_width]`.
    pub initial_width: T,
}

impl<T: Real> SimConfig<T> {
    /// Defaults: 200 periods, `dx = period/128`, CFL 0.4, level 0.5,
    /// transient 0.3, initial width 10.
    pub fn new(r: &PeriodicField<T>, d: &PeriodicField<T>, q: T, t_final: T) -> Self {
        let period = period_of(r, d);
        Self {
            r: r.clone(),
            d: d.clone(),
            q,
            domain_length: T::lit(200.0) * period,
            dx: period / T::lit(128.0),
            cfl_safety: T::lit(0.4),
            t_final,
            level: T::lit(0.5),
            transient_fraction: T::lit(0.3),
            initial_width: T::lit(10.0),
        }
    }

    pub fn period(&self) -> T {
        period_of(&self.r, &self.d)
    }

    fn validate(&self) -> Result<usize, SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        let period = self.period();
        if !(self.dx > T::zero()) || !(self.t_final > T::zero()) {
            return bad("dx and t_final must be positive");
        }
        if !(self.cfl_safety > T::zero() && self.cfl_safety <= T::one()) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if !(self.level > T::zero()) {
            return bad("level must be positive");
        }
        if !(self.transient_fraction >= T::zero() && self.transient_fraction < T::one()) {
            return bad("transient_fraction must lie in [0, 1)");
        }
        let per_period = period / self.dx;
        if (per_period - per_period.round()).abs() > T::lit(1e-9) * per_period {
            return bad("dx must divide the period");
        }
        let periods = self.domain_length / period;
        if (periods - periods.round()).abs() > T::lit(1e-9) * periods || periods < T::one() {
            return bad("domain_length must be a positive multiple of the period");
        }
        if !(self.initial_width > T::zero() && self.initial_width < self.domain_length) {
            return bad("initial_width must lie inside the domain");
        }
        self.d.check_diffusion()?;
        Ok((self.domain_length / self.dx).round().to_usize().unwrap_or(0))
    }
}

fn period_of<T: Real>(r: &PeriodicField<T>, d: &PeriodicField<T>) -> T {
    if d.as_constant().is_some() {
        r.period()
    } else {
        d.period()
    }
}

/// Precomputed coefficients of the semi-discrete scheme.
#[derive(Clone, Debug)]
pub struct Simulator<T: Real> {
    /// `D_{i+1/2}^{1−q} / dx²` for faces `i+1/2`, `i = 0..n-1`.
    face: Vec<T>,
    /// `D_i^q`.
    dq: Vec<T>,
    r: Vec<T>,
    pub dx: T,
    pub dt: T,
    /// Index of the Dirichlet node.
    pub n: usize,
    reaction: bool,
}

impl<T: Real> Simulator<T> {
    pub fn new(cfg: &SimConfig<T>) -> Result<Self, SimError> {
        let n = cfg.validate()?;
        let dx = cfg.dx;
        let xs: Vec<T> = (0..=n).map(|i| dx * T::from_usize_lossy(i)).collect();
        let dv: Vec<T> = xs.iter().map(|&x| cfg.d.eval(x)).collect();
        let r: Vec<T> = xs.iter().map(|&x| cfg.r.eval(x)).collect();
        let dq: Vec<T> = dv.iter().map(|d| d.powf(cfg.q)).collect();
        let inv2 = (dx * dx).recip();
        let one_q = T::one() - cfg.q;
        let face: Vec<T> = (0..n).map(|i| (dv[i] * dv[i + 1]).sqrt().powf(one_q) * inv2).collect();

        // largest total coupling of a node to its neighbours
        let mut max_coupling = T::zero();
        for i in 0..n {
            let left = if i == 0 { T::zero() } else { face[i - 1] };
            max_coupling = max_coupling.max((left + face[i]) * dq[i]);
        }
        let mut dt = cfg.cfl_safety / max_coupling;
        let max_r = r.iter().copied().fold(T::zero(), T::max);
        if max_r > T::zero() {
            dt = dt.min(T::lit(0.1) / max_r);
        }
        Ok(Self {
            face,
            dq,
            r,
            dx,
            dt,
            n,
            reaction: true,
        })
    }

    /// Switches the logistic term on or off (off leaves pure transport).
    pub fn set_reaction(&mut self, on: bool) {
        self.reaction = on;
    }

    /// Initial datum: 1 on `[0, width]`, 0 elsewhere.
    pub fn initial_state(&self, width: T) -> Vec<T> {
        (0..=self.n)
            .map(|i| {
                if self.dx * T::from_usize_lossy(i) <= width {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    /// One explicit Euler step on nodes `0..=active` (nodes beyond are
    /// zero and stay zero to rounding).
    pub fn step_window(&mut self, u: &mut [T], active: usize) -> Result<(), (usize, T)> {
        let last = active.min(self.n - 1);
        let tol = -T::lit(NEGATIVITY_TOLERANCE);
        let dt = self.dt;
        let react = if self.reaction { T::one() } else { T::zero() };
        let mut prev = T::zero();
        let mut w = self.dq[0] * u[0];
        let mut bad = None;
        // single sweep: u[i+1] is still the old value when face i+1/2 is formed
        for i in 0..=last {
            let w_next = self.dq[i + 1] * u[i + 1];
            let f = self.face[i] * (w_next - w);
            let ui = u[i];
            let v = ui + dt * (f - prev + react * ui * (self.r[i] - ui));
            if !(v >= tol) && bad.is_none() {
                bad = Some((i, v));
            }
            u[i] = v.max(T::zero());
            prev = f;
            w = w_next;
        }
        u[self.n] = T::zero();
        bad.map_or(Ok(()), Err)
    }

    /// One explicit Euler step on the whole grid.
    pub fn step(&mut self, u: &mut [T]) -> Result<(), (usize, T)> {
        let n = self.n;
        self.step_window(u, n)
    }

    /// Rightmost position where `u ≥ level`, interpolated linearly between
    /// the straddling nodes.
    pub fn front_position(&self, u: &[T], level: T, search_from: usize) -> Option<T> {
        let start = search_from.min(self.n);
        let i = (0..=start).rev().find(|&i| u[i] >= level)?;
        if i == self.n {
            return Some(self.dx * T::from_usize_lossy(i));
        }
        let (a, b) = (u[i], u[i + 1]);
        let frac = if a > b { (a - level) / (a - b) } else { T::zero() };
        Some(self.dx * (T::from_usize_lossy(i) + frac))
    }
}

/// One step of the scheme from `state` (helper for tests and small runs).
pub fn step<T: Real>(state: &[T], cfg: &SimConfig<T>) -> Result<Vec<T>, SimError> {
    let mut sim = Simulator::new(cfg)?;
    let mut u = state.to_vec();
    sim.step(&mut u).map_err(|(i, v)| SimError::Blowup {
        t: sim.dt.to_f64_lossy(),
        x: (sim.dx * T::from_usize_lossy(i)).to_f64_lossy(),
        value: v.to_f64_lossy(),
    })?;
    Ok(u)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace<T> {
    /// First times at which the front passes each multiple of the period.
    pub times: Vec<T>,
    pub positions: Vec<T>,
    pub fitted_speed: T,
    /// Root-mean-square deviation from the fitted line.
    pub fit_residual: T,
    pub dx: T,
    pub dt: T,
    pub steps: usize,
    /// Smallest value of `u` behind the front at the final time, away from
    /// both ends; it should exceed `level`.
    pub min_behind: T,
}

/// Runs to `t_final` from a step initial datum and fits the front speed.
pub fn measure_front_speed<T: Real>(cfg: &SimConfig<T>) -> Result<FrontTrace<T>, SimError> {
    let mut sim = Simulator::new(cfg)?;
    let mut u = sim.initial_state(cfg.initial_width);
    let period = cfg.period();
    let margin = cfg.domain_length - T::lit(BOUNDARY_MARGIN_PERIODS) * period;
    let tiny = T::min_positive_value().sqrt();
    let steps = (cfg.t_final / sim.dt).ceil().to_usize().unwrap_or(0);
    let t_transient = cfg.transient_fraction * cfg.t_final;

    let mut times = Vec::new();
    let mut positions = Vec::new();
    let mut next_mark = (cfg.initial_width / period).floor() * period + period;
    let mut active = (cfg.initial_width / sim.dx).ceil().to_usize().unwrap_or(0) + 2;
    let stride = (T::lit(FRONT_SAMPLE_INTERVAL) / sim.dt).floor().to_usize().unwrap_or(1).max(1);
    let mut furthest = T::zero();

    for s in 1..=steps {
        sim.step_window(&mut u, active).map_err(|(i, v)| SimError::Blowup {
            t: (sim.dt * T::from_usize_lossy(s)).to_f64_lossy(),
            x: (sim.dx * T::from_usize_lossy(i)).to_f64_lossy(),
            value: v.to_f64_lossy(),
        })?;
        while active < sim.n && u[active] > tiny {
            active += 1;
        }
        if s % stride != 0 && s != steps {
            continue;
        }
        let t = sim.dt * T::from_usize_lossy(s);
        let Some(x) = sim.front_position(&u, cfg.level, active) else {
            continue;
        };
        if x > margin {
            return Err(SimError::DomainTooShort {
                t: t.to_f64_lossy(),
                position: x.to_f64_lossy(),
            });
        }
        if t > t_transient && x < furthest - period {
            return Err(SimError::NonMonotone {
                t: t.to_f64_lossy(),
                from: furthest.to_f64_lossy(),
                to: x.to_f64_lossy(),
            });
        }
        furthest = furthest.max(x);
        while x >= next_mark {
            times.push(t);
            positions.push(x);
            next_mark = next_mark + period;
        }
    }

    let fit: Vec<(T, T)> = times
        .iter()
        .zip(&positions)
        .filter(|(t, _)| **t >= t_transient)
        .map(|(t, x)| (*t, *x))
        .collect();
    if fit.len() < 3 {
        return Err(SimError::TooFewSamples(fit.len()));
    }
    let (slope, residual) = line_fit(&fit);

    let behind_lo = (cfg.initial_width / sim.dx).ceil().to_usize().unwrap_or(0);
    let behind_hi = ((furthest - T::lit(10.0) * period) / sim.dx).floor().to_usize().unwrap_or(0);
    let min_behind = if behind_hi > behind_lo {
        u[behind_lo..behind_hi].iter().copied().fold(T::infinity(), T::min)
    } else {
        T::nan()
    };

    Ok(FrontTrace {
        times,
        positions,
        fitted_speed: slope,
        fit_residual: residual,
        dx: sim.dx,
        dt: sim.dt,
        steps,
        min_behind,
    })
}

/// Least-squares slope and RMS residual of `x ≈ a + c t`.
fn line_fit<T: Real>(pts: &[(T, T)]) -> (T, T) {
    let n = T::from_usize_lossy(pts.len());
    let mt = pts.iter().map(|p| p.0).sum::<T>() / n;
    let mx = pts.iter().map(|p| p.1).sum::<T>() / n;
    let stt = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum::<T>();
    let stx = pts.iter().map(|p| (p.0 - mt) * (p.1 - mx)).sum::<T>();
    let c = stx / stt;
    let a = mx - c * mt;
    let ss = pts.iter().map(|p| (p.1 - a - c * p.0).powi(2)).sum::<T>();
    (c, (ss / n).sqrt())
}
