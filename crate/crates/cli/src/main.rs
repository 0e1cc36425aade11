//! `qdiff`: principal eigenvalues, spreading speeds, identity checks,
//! sweeps, front simulations and annealing for the periodic q-diffusion KPP
//! equation.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdiff_core::speed::Direction;
use qdiff_core::sweeps::{Experiment, SweepSpec};
use qdiff_core::FieldSpec;

use commands::Failure;
use config::{resolve_workers, Command, ConfigError, OptimizeOptions, RunConfig, SimulateOptions};

#[derive(Parser)]
#[command(name = "qdiff", version, about = "Periodic q-diffusion KPP: eigenvalues, speeds, sweeps, simulations")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: qdiff_out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (falls back to QDIFF_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Relative tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct Problem {
    /// Growth rate, e.g. `const:1`, `cos2:0,1,0`, `spline:0.2,0.8,0.3,0.2`.
    #[arg(long = "r")]
    r: Option<FieldSpec>,
    /// Diffusion coefficient, same syntax as `--r`.
    #[arg(long = "D")]
    d: Option<FieldSpec>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    #[value(name = "speed_vs_q")]
    SpeedVsQ,
    #[value(name = "k_and_c_vs_omega")]
    KAndCVsOmega,
    #[value(name = "k_vs_B")]
    KVsB,
    #[value(name = "k_vs_q")]
    KVsQ,
    #[value(name = "verify")]
    Verify,
    #[value(name = "lemma_constructions")]
    LemmaConstructions,
}

#[derive(Subcommand)]
enum Sub {
    /// Principal eigenvalue k_q^λ[r; D].
    Eig {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: Problem,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
    },
    /// Spreading speed c* = inf k^{±λ}/λ.
    Speed {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_enum)]
        direction: Option<DirectionArg>,
    },
    /// Identity verification suite; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Parameter sweep written as CSV plus JSON manifest.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_enum)]
        experiment: Option<ExperimentArg>,
        /// Swept values, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
        /// Secondary q values, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        qs: Option<Vec<f64>>,
        /// Secondary ω values, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        omegas: Option<Vec<f64>>,
    },
    /// Front simulation and fitted front speed.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long)]
        domain_length: Option<f64>,
        #[arg(long)]
        level: Option<f64>,
    },
    /// Simulated annealing of a spline D for a speed ratio.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Growth rate [default: cos2:0,1,0].
        #[arg(long = "r")]
        r: Option<FieldSpec>,
        #[arg(long, allow_negative_numbers = true)]
        q_num: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        q_den: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iters: Option<usize>,
    },
}

fn apply_common(cfg: &mut RunConfig, c: &Common) {
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    if c.tol.is_some() {
        cfg.tolerance = c.tol;
    }
}

fn apply_problem(cfg: &mut RunConfig, p: Problem) {
    if p.r.is_some() {
        cfg.r = p.r;
    }
    if p.d.is_some() {
        cfg.d = p.d;
    }
    if p.q.is_some() {
        cfg.q = p.q;
    }
}

/// Loads the config file (if any) and applies the flags.
fn resolve(sub: Sub) -> Result<(Command, RunConfig), ConfigError> {
    let (cmd, common) = match &sub {
        Sub::Eig { common, .. } => (Command::Eig, common.clone()),
        Sub::Speed { common, .. } => (Command::Speed, common.clone()),
        Sub::Verify { common } => (Command::Verify, common.clone()),
        Sub::Sweep { common, .. } => (Command::Sweep, common.clone()),
        Sub::Simulate { common, .. } => (Command::Simulate, common.clone()),
        Sub::Optimize { common, .. } => (Command::Optimize, common.clone()),
    };
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(declared) = cfg.subcommand {
        if declared != cmd {
            return Err(ConfigError(format!(
                "config declares subcommand `{}` but `{}` was invoked",
                declared.name(),
                cmd.name()
            )));
        }
    }
    cfg.subcommand = Some(cmd);
    apply_common(&mut cfg, &common);
    cfg.workers = resolve_workers(common.workers, cfg.workers)?;
    if cfg.workers == Some(0) {
        return Err(ConfigError("`workers` must be at least 1".into()));
    }

    match sub {
        Sub::Eig { problem, lambda, .. } => {
            apply_problem(&mut cfg, problem);
            if lambda.is_some() {
                cfg.lambda = lambda;
            }
        }
        Sub::Speed { problem, direction, .. } => {
            apply_problem(&mut cfg, problem);
            if let Some(d) = direction {
                cfg.direction = Some(match d {
                    DirectionArg::Left => Direction::Left,
                    DirectionArg::Right => Direction::Right,
                });
            }
        }
        Sub::Verify { .. } => {}
        Sub::Sweep {
            problem,
            experiment,
            grid,
            qs,
            omegas,
            ..
        } => {
            apply_problem(&mut cfg, problem);
            if let Some(e) = experiment {
                let e = match e {
                    ExperimentArg::SpeedVsQ => Experiment::SpeedVsQ,
                    ExperimentArg::KAndCVsOmega => Experiment::KAndCVsOmega,
                    ExperimentArg::KVsB => Experiment::KVsB,
                    ExperimentArg::KVsQ => Experiment::KVsQ,
                    ExperimentArg::Verify => Experiment::Verify,
                    ExperimentArg::LemmaConstructions => Experiment::LemmaConstructions,
                };
                match cfg.sweep.as_mut() {
                    Some(s) => s.experiment = e,
                    None => cfg.sweep = Some(SweepSpec::new(e, Vec::new())),
                }
            }
            if grid.is_some() || qs.is_some() || omegas.is_some() {
                let s = cfg
                    .sweep
                    .as_mut()
                    .ok_or_else(|| ConfigError("`--grid/--qs/--omegas` need `--experiment` or a [sweep] table".into()))?;
                if let Some(g) = grid {
                    s.grid = g;
                }
                if let Some(q) = qs {
                    s.q = q;
                }
                if let Some(w) = omegas {
                    s.omega = w;
                }
            }
        }
        Sub::Simulate {
            problem,
            t_final,
            dx,
            domain_length,
            level,
            ..
        } => {
            apply_problem(&mut cfg, problem);
            let o = cfg.simulate.get_or_insert_with(SimulateOptions::default);
            o.t_final = t_final.or(o.t_final);
            o.dx = dx.or(o.dx);
            o.domain_length = domain_length.or(o.domain_length);
            o.level = level.or(o.level);
        }
        Sub::Optimize {
            r,
            q_num,
            q_den,
            seed,
            iters,
            ..
        } => {
            if r.is_some() {
                cfg.r = r;
            }
            let o = cfg.optimize.get_or_insert_with(OptimizeOptions::default);
            o.q_num = q_num.or(o.q_num);
            o.q_den = q_den.or(o.q_den);
            o.seed = seed.or(o.seed);
            o.n_iters = iters.or(o.n_iters);
        }
    }
    Ok((cmd, cfg))
}

fn execute(cmd: Command, cfg: &mut RunConfig) -> Result<(), Failure> {
    match cfg.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Run(output::RunError(e.to_string())))?;
            pool.install(|| commands::run(cmd, cfg))
        }
        None => commands::run(cmd, cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, mut cfg) = match resolve(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(cmd, &mut cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {}", e.0);
            ExitCode::from(1)
        }
    }
}
