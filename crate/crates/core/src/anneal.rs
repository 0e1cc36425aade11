//! Simulated annealing over four-point periodic spline diffusion
//! coefficients, maximizing a ratio of spreading speeds `c*_{q_num} / c*_{q_den}`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{build_periodic_spline, FieldError, PeriodicField, SPLINE_BOUNDS};
use crate::scalar::Real;
use crate::speed::{spreading_speed, Direction, SpeedError};

/// Proposals are clipped this far inside the open control bounds.
pub const BOUND_INSET: f64 = 1e-9;
/// Cache keys round controls to this grid.
pub const CACHE_GRID: f64 = 1e-6;
/// Points used to locate the spline maximum.
pub const PEAK_SCAN: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnealError {
    #[error("invalid annealing config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug)]
pub struct AnnealConfig<T: Real> {
    /// Growth rate, fixed during the search.
    pub r: PeriodicField<T>,
    pub q_num: T,
    pub q_den: T,
    pub bounds: (T, T),
    pub n_iters: usize,
    pub t0: T,
    /// Temperature factor applied every `cool_every` iterations.
    pub cool: T,
    pub cool_every: usize,
    pub proposal_sigma: T,
    pub seed: u64,
    /// Relative tolerance of each speed evaluation.
    pub speed_tol: T,
    pub initial_control: [T; 4],
}

impl<T: Real> AnnealConfig<T> {
    /// Defaults: 2000 iterations, `T0 = 0.1`, cooling 0.95 every 20
    /// iterations, proposal σ 0.05, bounds `(0.1, 1)`, speed tolerance 1e-4,
    /// start at the constant control 0.55.
    pub fn new(r: &PeriodicField<T>, q_num: T, q_den: T, seed: u64) -> Self {
        let c = T::lit(0.55);
        Self {
            r: r.clone(),
            q_num,
            q_den,
            bounds: (T::lit(SPLINE_BOUNDS.0), T::lit(SPLINE_BOUNDS.1)),
            n_iters: 2000,
            t0: T::lit(0.1),
            cool: T::lit(0.95),
            cool_every: 20,
            proposal_sigma: T::lit(0.05),
            seed,
            speed_tol: T::lit(1e-4),
            initial_control: [c, c, c, c],
        }
    }

    pub fn validate(&self) -> Result<(), AnnealError> {
        let bad = |m: &str| Err(AnnealError::InvalidConfig(m.to_string()));
        let (lo, hi) = self.bounds;
        if !(lo < hi) || lo < T::lit(SPLINE_BOUNDS.0) || hi > T::lit(SPLINE_BOUNDS.1) {
            return bad("bounds must be ordered and inside (0.1, 1)");
        }
        if !(self.cool > T::zero() && self.cool < T::one()) {
            return bad("cool must lie in (0, 1)");
        }
        if self.cool_every == 0 {
            return bad("cool_every must be positive");
        }
        if !(self.t0 > T::zero()) || !(self.proposal_sigma > T::zero()) || !(self.speed_tol > T::zero()) {
            return bad("t0, proposal_sigma and speed_tol must be positive");
        }
        if self.initial_control[0] != self.initial_control[3] {
            return bad("initial_control must satisfy first == last");
        }
        Ok(())
    }

    pub fn temperature(&self, iteration: usize) -> T {
        let stages = i32::try_from(iteration / self.cool_every).unwrap_or(i32::MAX);
        self.t0 * self.cool.powi(stages)
    }
}

/// Reason a control received the zero-ratio penalty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Penalty {
    Extinction { q: f64 },
    InvalidSpline { reason: String },
    Numerical { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Objective<T> {
    pub ratio: T,
    pub c_num: Option<T>,
    pub c_den: Option<T>,
    pub penalty: Option<Penalty>,
}

impl<T: Real> Objective<T> {
    fn penalized(p: Penalty) -> Self {
        Self {
            ratio: T::zero(),
            c_num: None,
            c_den: None,
            penalty: Some(p),
        }
    }
}

/// `c*_{q_num}[r, D] / c*_{q_den}[r, D]` with `D` the spline through `control`.
pub fn objective_eval<T: Real>(control: &[T; 4], cfg: &AnnealConfig<T>) -> Result<Objective<T>, AnnealError> {
    let d = build_periodic_spline(control)?;
    let speed = |q: T| spreading_speed(&cfg.r, &d, q, Direction::Right, cfg.speed_tol);
    let (num, den) = rayon::join(|| speed(cfg.q_num), || speed(cfg.q_den));
    let classify = |e: SpeedError, q: T| match e {
        SpeedError::Extinction { .. } => Penalty::Extinction { q: q.to_f64_lossy() },
        other => Penalty::Numerical {
            reason: other.to_string(),
        },
    };
    match (num, den) {
        (Ok(a), Ok(b)) => Ok(Objective {
            ratio: a.c_star / b.c_star,
            c_num: Some(a.c_star),
            c_den: Some(b.c_star),
            penalty: None,
        }),
        (Err(e), _) => Ok(Objective::penalized(classify(e, cfg.q_num))),
        (_, Err(e)) => Ok(Objective::penalized(classify(e, cfg.q_den))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry<T> {
    pub iteration: usize,
    pub control: [T; 4],
    pub ratio: T,
    pub accepted: bool,
    pub temperature: T,
    /// Best accepted ratio so far.
    pub best_ratio: T,
    pub penalty: Option<Penalty>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult<T> {
    pub best_control: [T; 4],
    pub best_ratio: T,
    /// Iteration 0 is the initial control.
    pub history: Vec<HistoryEntry<T>>,
    /// Objective evaluations actually computed (cache misses).
    pub evaluations: usize,
}

/// Metropolis chain with geometric cooling; deterministic in `cfg.seed`.
pub fn run_annealing<T: Real>(cfg: &AnnealConfig<T>) -> Result<AnnealResult<T>, AnnealError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, cfg.proposal_sigma.to_f64_lossy())
        .map_err(|e| AnnealError::InvalidConfig(e.to_string()))?;
    let (lo, hi) = cfg.bounds;
    let inset = T::lit(BOUND_INSET);
    let (lo, hi) = (lo + inset, hi - inset);

    let mut cache: HashMap<[i64; 3], Objective<T>> = HashMap::new();
    let mut evaluations = 0usize;
    let mut evaluate = |c: &[T; 4]| -> Objective<T> {
        let key = [0, 1, 2].map(|i| (c[i].to_f64_lossy() / CACHE_GRID).round() as i64);
        if let Some(hit) = cache.get(&key) {
            return hit.clone();
        }
        evaluations += 1;
        let obj = objective_eval(c, cfg).unwrap_or_else(|e| {
            Objective::penalized(Penalty::InvalidSpline { reason: e.to_string() })
        });
        cache.insert(key, obj.clone());
        obj
    };

    let mut current = cfg.initial_control;
    let first = evaluate(&current);
    let mut current_ratio = first.ratio;
    let mut best = (current, current_ratio);
    let mut history = vec![HistoryEntry {
        iteration: 0,
        control: current,
        ratio: current_ratio,
        accepted: true,
        temperature: cfg.t0,
        best_ratio: current_ratio,
        penalty: first.penalty,
    }];

    for it in 1..=cfg.n_iters {
        let temp = cfg.temperature(it);
        let mut proposal = current;
        for v in proposal.iter_mut().take(3) {
            *v = (*v + T::lit(normal.sample(&mut rng))).max(lo).min(hi);
        }
        proposal[3] = proposal[0];
        let obj = evaluate(&proposal);
        let delta = obj.ratio - current_ratio;
        let u: f64 = rng.random();
        let accepted = delta >= T::zero() || T::lit(u) < (delta / temp).exp();
        if accepted {
            current = proposal;
            current_ratio = obj.ratio;
            if current_ratio > best.1 {
                best = (current, current_ratio);
            }
        }
        history.push(HistoryEntry {
            iteration: it,
            control: proposal,
            ratio: obj.ratio,
            accepted,
            temperature: temp,
            best_ratio: best.1,
            penalty: obj.penalty,
        });
    }

    Ok(AnnealResult {
        best_control: best.0,
        best_ratio: best.1,
        history,
        evaluations,
    })
}

/// Location in `[0, 1)` of the maximum of the spline through `control`.
pub fn spline_peak<T: Real>(control: &[T; 4]) -> Result<T, AnnealError> {
    let d = build_periodic_spline(control)?;
    let h = T::one() / T::from_usize_lossy(PEAK_SCAN);
    let (mut arg, mut top) = (T::zero(), T::neg_infinity());
    for i in 0..PEAK_SCAN {
        let x = h * T::from_usize_lossy(i);
        let v = d.eval(x);
        if v > top {
            top = v;
            arg = x;
        }
    }
    Ok(arg)
}

/// Distance from `x` to `target` on the unit circle.
pub fn circular_distance<T: Real>(x: T, target: T) -> T {
    let d = (x - target).abs() % T::one();
    d.min(T::one() - d)
}
