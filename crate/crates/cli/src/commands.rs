//! Subcommand bodies. Each fills in defaults on the config (so the manifest
//! records what actually ran), computes, prints `key = value` lines and
//! writes its output files.

use std::time::Instant;

use qdiff_core::anneal::{run_annealing, spline_peak, AnnealConfig};
use qdiff_core::eigen::k_value;
use qdiff_core::pdesim::{measure_front_speed, SimConfig};
use qdiff_core::speed::{spreading_speed, Direction};
use qdiff_core::sweeps::{run_sweep, Experiment, SweepManifest, SweepSpec};
use qdiff_core::{Field, FieldSpec};
use serde::Serialize;

use crate::config::{check_finite, check_positive, Command, ConfigError, OptimizeOptions, RunConfig, SimulateOptions};
use crate::output::{num, print_count, print_value, write_json, write_text, RunError};

pub enum Failure {
    Config(ConfigError),
    Run(RunError),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure::Run(e)
    }
}

fn build(spec: &FieldSpec, key: &str) -> Result<Field, ConfigError> {
    spec.build().map_err(|e| ConfigError(format!("`{key}` = {spec}: {e}")))
}

fn diffusion(spec: &FieldSpec) -> Result<Field, ConfigError> {
    let d = build(spec, "D")?;
    d.check_diffusion().map_err(|e| ConfigError(format!("`D` = {spec}: {e}")))?;
    Ok(d)
}

fn run_error(e: impl std::fmt::Display) -> Failure {
    Failure::Run(RunError(e.to_string()))
}

pub fn run(cmd: Command, cfg: &mut RunConfig) -> Result<(), Failure> {
    match cmd {
        Command::Eig => eig(cfg),
        Command::Speed => speed(cfg),
        Command::Verify => verify(cfg),
        Command::Sweep => sweep(cfg),
        Command::Simulate => simulate(cfg),
        Command::Optimize => optimize(cfg),
    }
}

fn eig(cfg: &mut RunConfig) -> Result<(), Failure> {
    let r = build(cfg.require_r()?, "r")?;
    let d = diffusion(cfg.require_d()?)?;
    let q = cfg.require_q()?;
    check_finite("q", q)?;
    let lambda = *cfg.lambda.get_or_insert(0.0);
    check_finite("lambda", lambda)?;
    let tol = cfg.tolerance_or_default(Command::Eig);
    check_positive("tolerance", tol)?;
    cfg.tolerance = Some(tol);

    let k = k_value(&r, &d, q, lambda, tol).map_err(run_error)?;
    print_value("k", k.k);
    print_count("n_used", k.n_used);
    print_value("error_estimate", k.error_estimate);
    write_json(&cfg.out_dir(), "eig.json", cfg, &k)?;
    Ok(())
}

fn speed(cfg: &mut RunConfig) -> Result<(), Failure> {
    let r = build(cfg.require_r()?, "r")?;
    let d = diffusion(cfg.require_d()?)?;
    let q = cfg.require_q()?;
    check_finite("q", q)?;
    let tol = cfg.tolerance_or_default(Command::Speed);
    check_positive("tolerance", tol)?;
    cfg.tolerance = Some(tol);
    let dir = *cfg.direction.get_or_insert(Direction::Right);

    let s = spreading_speed(&r, &d, q, dir, tol).map_err(run_error)?;
    print_value("c_star", s.c_star);
    print_value("lambda_star", s.lambda_star);
    print_value("k_at_lambda_star", s.k_at_lambda_star);
    print_value("persistence", s.persistence);
    print_count("evaluations", s.evaluations);
    write_json(&cfg.out_dir(), "speed.json", cfg, &s)?;
    Ok(())
}

fn verify(cfg: &mut RunConfig) -> Result<(), Failure> {
    let tol = cfg.tolerance_or_default(Command::Verify);
    check_positive("tolerance", tol)?;
    cfg.tolerance = Some(tol);
    let mut spec = SweepSpec::new(Experiment::Verify, Vec::new());
    spec.tolerance = tol;
    let failures = run_table(cfg, &spec, "verify")?;
    if failures > 0 {
        return Err(run_error(format!("{failures} identity check(s) failed")));
    }
    Ok(())
}

fn sweep(cfg: &mut RunConfig) -> Result<(), Failure> {
    let mut spec = cfg
        .sweep
        .clone()
        .ok_or_else(|| ConfigError("missing sweep definition: pass `--experiment` or add a [sweep] table".into()))?;
    if let Some(r) = &cfg.r {
        spec.r = Some(r.clone());
    }
    if let Some(d) = &cfg.d {
        spec.d = Some(d.clone());
    }
    if let Some(t) = cfg.tolerance {
        spec.tolerance = t;
    }
    spec.validate().map_err(|e| ConfigError(e.to_string()))?;
    cfg.sweep = Some(spec.clone());
    run_table(cfg, &spec, "sweep")?;
    Ok(())
}

/// Runs a sweep, echoes the CSV and writes `<stem>.csv` and `<stem>.json`.
fn run_table(cfg: &RunConfig, spec: &SweepSpec, stem: &str) -> Result<usize, Failure> {
    let start = Instant::now();
    let table = run_sweep(spec, cfg.workers).map_err(run_error)?;
    let csv_name = format!("{stem}.csv");
    let csv = table.to_csv();
    let manifest = SweepManifest::new(spec, cfg.workers, &table, start.elapsed().as_secs_f64(), &csv_name);
    let dir = cfg.out_dir();
    write_text(&dir, &csv_name, &csv)?;
    write_json(&dir, &format!("{stem}.json"), cfg, &manifest)?;
    print!("{csv}");
    print_count("rows", manifest.rows);
    print_count("failures", manifest.failures);
    Ok(manifest.failures)
}

#[derive(Serialize)]
struct SimulateSummary {
    fitted_speed: f64,
    fit_residual: f64,
    dx: f64,
    dt: f64,
    steps: usize,
    samples: usize,
    min_behind: f64,
    csv: String,
}

fn simulate(cfg: &mut RunConfig) -> Result<(), Failure> {
    let r = build(cfg.require_r()?, "r")?;
    let d = diffusion(cfg.require_d()?)?;
    let q = cfg.require_q()?;
    check_finite("q", q)?;
    let opts = cfg.simulate.get_or_insert_with(SimulateOptions::default);
    let t_final = *opts.t_final.get_or_insert(60.0);
    check_positive("simulate.t_final", t_final)?;
    let mut sc = SimConfig::new(&r, &d, q, t_final);
    sc.dx = *opts.dx.get_or_insert(sc.dx);
    sc.domain_length = *opts.domain_length.get_or_insert(sc.domain_length);
    sc.level = *opts.level.get_or_insert(sc.level);
    sc.cfl_safety = *opts.cfl_safety.get_or_insert(sc.cfl_safety);
    sc.transient_fraction = *opts.transient_fraction.get_or_insert(sc.transient_fraction);
    sc.initial_width = *opts.initial_width.get_or_insert(sc.initial_width);

    let trace = measure_front_speed(&sc).map_err(|e| match e {
        qdiff_core::pdesim::SimError::InvalidConfig(m) => Failure::Config(ConfigError(format!("simulate: {m}"))),
        other => run_error(other),
    })?;
    let mut csv = String::from("t,x_front\n");
    for (t, x) in trace.times.iter().zip(&trace.positions) {
        csv.push_str(&format!("{},{}\n", num(*t), num(*x)));
    }
    let summary = SimulateSummary {
        fitted_speed: trace.fitted_speed,
        fit_residual: trace.fit_residual,
        dx: trace.dx,
        dt: trace.dt,
        steps: trace.steps,
        samples: trace.times.len(),
        min_behind: trace.min_behind,
        csv: "front.csv".into(),
    };
    let dir = cfg.out_dir();
    write_text(&dir, "front.csv", &csv)?;
    write_json(&dir, "simulate.json", cfg, &summary)?;
    print_value("fitted_speed", summary.fitted_speed);
    print_value("fit_residual", summary.fit_residual);
    print_value("dx", summary.dx);
    print_value("dt", summary.dt);
    print_count("steps", summary.steps);
    print_count("samples", summary.samples);
    print_value("min_behind", summary.min_behind);
    Ok(())
}

#[derive(Serialize)]
struct OptimizeSummary {
    best_control: [f64; 4],
    best_ratio: f64,
    evaluations: usize,
    iterations: usize,
    accepted: usize,
    peak_location: f64,
    trace: String,
}

fn optimize(cfg: &mut RunConfig) -> Result<(), Failure> {
    let r_spec = cfg
        .r
        .get_or_insert(FieldSpec::Cos2 {
            offset: 0.0,
            amplitude: 1.0,
            phase: 0.0,
        })
        .clone();
    let r = build(&r_spec, "r")?;
    let tol = cfg.tolerance_or_default(Command::Optimize);
    check_positive("tolerance", tol)?;
    cfg.tolerance = Some(tol);
    let opts = cfg.optimize.get_or_insert_with(OptimizeOptions::default);
    let seed = opts
        .seed
        .ok_or_else(|| ConfigError("optimize needs a seed: pass `--seed N` or set optimize.seed".into()))?;
    let q_num = *opts.q_num.get_or_insert(0.0);
    let q_den = *opts.q_den.get_or_insert(1.0);
    let mut ac = AnnealConfig::new(&r, q_num, q_den, seed);
    ac.speed_tol = tol;
    ac.n_iters = *opts.n_iters.get_or_insert(ac.n_iters);
    ac.t0 = *opts.t0.get_or_insert(ac.t0);
    ac.cool = *opts.cool.get_or_insert(ac.cool);
    ac.cool_every = *opts.cool_every.get_or_insert(ac.cool_every);
    ac.proposal_sigma = *opts.proposal_sigma.get_or_insert(ac.proposal_sigma);
    ac.bounds = *opts.bounds.get_or_insert(ac.bounds);
    ac.initial_control = *opts.initial_control.get_or_insert(ac.initial_control);
    ac.validate().map_err(|e| ConfigError(e.to_string()))?;

    let res = run_annealing(&ac).map_err(run_error)?;
    let peak = spline_peak(&res.best_control).map_err(run_error)?;
    let mut csv = String::from("iteration,c0,c1,c2,c3,ratio,accepted,temperature,best_ratio,penalty\n");
    for h in &res.history {
        let penalty = h
            .penalty
            .as_ref()
            .map(|p| serde_json::to_string(p).unwrap_or_default().replace(',', ";"))
            .unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            h.iteration,
            num(h.control[0]),
            num(h.control[1]),
            num(h.control[2]),
            num(h.control[3]),
            num(h.ratio),
            h.accepted,
            num(h.temperature),
            num(h.best_ratio),
            penalty
        ));
    }
    let summary = OptimizeSummary {
        best_control: res.best_control,
        best_ratio: res.best_ratio,
        evaluations: res.evaluations,
        iterations: ac.n_iters,
        accepted: res.history.iter().filter(|h| h.accepted).count(),
        peak_location: peak,
        trace: "anneal_trace.csv".into(),
    };
    let dir = cfg.out_dir();
    write_text(&dir, "anneal_trace.csv", &csv)?;
    write_json(&dir, "anneal.json", cfg, &summary)?;
    print_value("best_ratio", summary.best_ratio);
    for (i, c) in summary.best_control.iter().enumerate() {
        print_value(&format!("best_control[{i}]"), *c);
    }
    print_value("peak_location", summary.peak_location);
    print_count("evaluations", summary.evaluations);
    print_count("accepted", summary.accepted);
    Ok(())
}
