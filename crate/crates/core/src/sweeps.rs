//! Parameter sweeps over `q`, the phase shift `ω` and the diffusion scale
//! `B`, plus the verification suite and the lemma constructions, written as
//! CSV tables with a JSON manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::k_value;
use crate::fields::{FieldError, FieldSpec};
use crate::identities::{lemma_constructions, verify_suite, SuiteTolerances};
use crate::speed::{spreading_speed, Direction};

/// First line of every sweep CSV.
pub const CSV_MAGIC: &str = "# qdiff-sweep v1";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serializing manifest: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// `c*_q` and `k_q^0` over a `q` grid.
    SpeedVsQ,
    /// `k_q^0` and `c*_q` over an `ω` grid (D shifted by ω) for each `q`.
    KAndCVsOmega,
    /// `k_q^0[r; B·D]` over a `B` grid for each `q`.
    #[serde(rename = "k_vs_B")]
    KVsB,
    /// `k_q^0` over a `q` grid for each `ω`.
    KVsQ,
    /// The identity verification suite.
    Verify,
    /// `r = 1 + h_q` and `r = −a h_q` compared at `q` and `0`, over a `q` grid.
    LemmaConstructions,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SpeedVsQ => "speed_vs_q",
            Experiment::KAndCVsOmega => "k_and_c_vs_omega",
            Experiment::KVsB => "k_vs_B",
            Experiment::KVsQ => "k_vs_q",
            Experiment::Verify => "verify",
            Experiment::LemmaConstructions => "lemma_constructions",
        }
    }

    fn needs_grid(self) -> bool {
        self != Experiment::Verify
    }
}

fn default_tolerance() -> f64 {
    1e-7
}

fn default_a() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub experiment: Experiment,
    /// Swept values: `q` for speed_vs_q, k_vs_q and lemma_constructions,
    /// `ω` for k_and_c_vs_omega, `B` for k_vs_B.
    #[serde(default)]
    pub grid: Vec<f64>,
    /// Secondary `q` values (k_and_c_vs_omega, k_vs_B).
    #[serde(default)]
    pub q: Vec<f64>,
    /// Secondary `ω` values (k_vs_q); defaults to `[0]`.
    #[serde(default)]
    pub omega: Vec<f64>,
    #[serde(default)]
    pub r: Option<FieldSpec>,
    #[serde(default, rename = "D")]
    pub d: Option<FieldSpec>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Amplitude of the negative lemma construction.
    #[serde(default = "default_a")]
    pub a: f64,
}

impl SweepSpec {
    pub fn new(experiment: Experiment, grid: Vec<f64>) -> Self {
        Self {
            experiment,
            grid,
            q: Vec::new(),
            omega: Vec::new(),
            r: None,
            d: None,
            tolerance: default_tolerance(),
            a: default_a(),
        }
    }

    /// `r`, defaulting to `1` for speed_vs_q and to `cos²(πx)` otherwise.
    pub fn r_spec(&self) -> FieldSpec {
        self.r.clone().unwrap_or(match self.experiment {
            Experiment::SpeedVsQ => FieldSpec::Constant { value: 1.0 },
            _ => FieldSpec::Cos2 {
                offset: 0.0,
                amplitude: 1.0,
                phase: 0.0,
            },
        })
    }

    /// `D`, defaulting to `0.1 + cos²(πx)`.
    pub fn d_spec(&self) -> FieldSpec {
        self.d.clone().unwrap_or(FieldSpec::Cos2 {
            offset: 0.1,
            amplitude: 1.0,
            phase: 0.0,
        })
    }

    fn secondary(&self) -> Vec<f64> {
        match self.experiment {
            Experiment::KAndCVsOmega | Experiment::KVsB => self.q.clone(),
            Experiment::KVsQ if self.omega.is_empty() => vec![0.0],
            Experiment::KVsQ => self.omega.clone(),
            _ => vec![f64::NAN],
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::InvalidSpec(m));
        if self.experiment.needs_grid() && self.grid.is_empty() {
            return bad(format!("{} needs a nonempty grid", self.experiment.name()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("grid must be finite and strictly increasing".into());
        }
        if matches!(self.experiment, Experiment::KAndCVsOmega | Experiment::KVsB) && self.q.is_empty() {
            return bad(format!("{} needs a nonempty q list", self.experiment.name()));
        }
        if self.q.iter().chain(&self.omega).any(|v| !v.is_finite()) {
            return bad("q and omega lists must be finite".into());
        }
        if self.experiment == Experiment::KVsB && self.grid.iter().any(|b| *b <= 0.0) {
            return bad("B values must be positive".into());
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive".into());
        }
        if !(self.a > 0.0) {
            return bad("a must be positive".into());
        }
        self.r_spec().build()?;
        self.d_spec().build()?.check_diffusion()?;
        Ok(())
    }
}

/// Sweep output: named columns, one row per grid point, a status column last.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub values: Vec<f64>,
    /// Text cells placed before the numeric ones (verify only).
    pub labels: Vec<String>,
    pub status: String,
}

impl SweepRow {
    fn ok(values: Vec<f64>) -> Self {
        Self {
            values,
            labels: Vec::new(),
            status: "ok".into(),
        }
    }

    fn failed(values: Vec<f64>, width: usize, err: impl std::fmt::Display) -> Self {
        let mut values = values;
        values.resize(width, f64::NAN);
        Self {
            values,
            labels: Vec::new(),
            status: sanitize(&err.to_string()),
        }
    }
}

fn sanitize(s: &str) -> String {
    s.replace([',', '\n', '"'], ";")
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status != "ok" && r.status != "pass").count()
    }

    /// Column values of a numeric column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let labels = self.rows.first().map_or(0, |r| r.labels.len());
        let idx = self.columns.iter().position(|c| c == name)?.checked_sub(labels)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(CSV_MAGIC);
        s.push('\n');
        s.push_str(&self.columns.join(","));
        s.push_str(",status\n");
        for row in &self.rows {
            for l in &row.labels {
                let _ = write!(s, "{l},");
            }
            for v in &row.values {
                let _ = write!(s, "{v},");
            }
            s.push_str(&row.status);
            s.push('\n');
        }
        s
    }
}

/// Runs the sweep on a pool of `workers` threads (all cores when `None`).
/// Output order follows the grid regardless of scheduling.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| SweepError::Pool(e.to_string()))?;
    pool.install(|| run_in_pool(spec))
}

fn run_in_pool(spec: &SweepSpec) -> Result<SweepTable, SweepError> {
    let r_spec = spec.r_spec();
    let d_spec = spec.d_spec();
    let r = r_spec.build()?;
    let d = d_spec.build()?;
    let tol = spec.tolerance;
    let cols = |c: &[&str]| c.iter().map(|s| s.to_string()).collect::<Vec<_>>();

    let points: Vec<(f64, f64)> = spec
        .secondary()
        .into_iter()
        .flat_map(|s| spec.grid.iter().map(move |&g| (s, g)))
        .collect();

    let table = match spec.experiment {
        Experiment::SpeedVsQ => SweepTable {
            columns: cols(&["q", "lambda_star", "c_star", "k0"]),
            rows: points
                .par_iter()
                .map(|&(_, q)| match spreading_speed(&r, &d, q, Direction::Right, tol) {
                    Ok(s) => SweepRow::ok(vec![q, s.lambda_star, s.c_star, s.persistence]),
                    Err(e) => SweepRow::failed(vec![q], 4, e),
                })
                .collect(),
        },
        Experiment::KAndCVsOmega => SweepTable {
            columns: cols(&["q", "omega", "k0", "lambda_star", "c_star"]),
            rows: points
                .par_iter()
                .map(|&(q, w)| {
                    let run = || -> Result<Vec<f64>, String> {
                        let dw = d_spec.shifted(w).build().map_err(|e| e.to_string())?;
                        let k = k_value(&r, &dw, q, 0.0, tol).map_err(|e| e.to_string())?.k;
                        let s = spreading_speed(&r, &dw, q, Direction::Right, tol).map_err(|e| e.to_string())?;
                        Ok(vec![q, w, k, s.lambda_star, s.c_star])
                    };
                    match run() {
                        Ok(v) => SweepRow::ok(v),
                        Err(e) => SweepRow::failed(vec![q, w], 5, e),
                    }
                })
                .collect(),
        },
        Experiment::KVsB => SweepTable {
            columns: cols(&["q", "B", "k0"]),
            rows: points
                .par_iter()
                .map(|&(q, b)| match k_value(&r, &d.scaled(b), q, 0.0, tol) {
                    Ok(k) => SweepRow::ok(vec![q, b, k.k]),
                    Err(e) => SweepRow::failed(vec![q, b], 3, e),
                })
                .collect(),
        },
        Experiment::KVsQ => SweepTable {
            columns: cols(&["omega", "q", "k0"]),
            rows: points
                .par_iter()
                .map(|&(w, q)| {
                    let k = d_spec
                        .shifted(w)
                        .build()
                        .map_err(|e| e.to_string())
                        .and_then(|dw| k_value(&r, &dw, q, 0.0, tol).map_err(|e| e.to_string()));
                    match k {
                        Ok(k) => SweepRow::ok(vec![w, q, k.k]),
                        Err(e) => SweepRow::failed(vec![w, q], 3, e),
                    }
                })
                .collect(),
        },
        Experiment::Verify => {
            let tolerances = SuiteTolerances {
                eigen: tol.min(SuiteTolerances::default().eigen),
                ..SuiteTolerances::default()
            };
            SweepTable {
                columns: cols(&["identity", "case", "gap", "tolerance"]),
                rows: verify_suite(&tolerances)
                    .into_iter()
                    .map(|c| SweepRow {
                        values: vec![c.gap, c.tolerance],
                        labels: vec![sanitize(&c.identity), sanitize(&c.case)],
                        status: c.status().into(),
                    })
                    .collect(),
            }
        }
        Experiment::LemmaConstructions => SweepTable {
            columns: cols(&[
                "q",
                "plus_kq",
                "plus_k0",
                "plus_margin",
                "minus_kq",
                "minus_k0",
                "minus_margin",
            ]),
            rows: points
                .par_iter()
                .map(|&(_, q)| match lemma_constructions(&d, q, spec.a, tol) {
                    Ok(l) => SweepRow::ok(vec![
                        q,
                        l.plus_kq,
                        l.plus_k0,
                        l.plus_margin(),
                        l.minus_kq,
                        l.minus_k0,
                        l.minus_margin(),
                    ]),
                    Err(e) => SweepRow::failed(vec![q], 7, e),
                })
                .collect(),
        },
    };
    Ok(table)
}

/// JSON record written next to every sweep CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepManifest {
    pub format: String,
    pub version: String,
    pub spec: SweepSpec,
    /// Fields as built, in inline form.
    pub r: String,
    #[serde(rename = "D")]
    pub d: String,
    pub workers: Option<usize>,
    pub rows: usize,
    pub failures: usize,
    pub wall_time_s: f64,
    pub csv: String,
}

impl SweepManifest {
    pub fn new(spec: &SweepSpec, workers: Option<usize>, table: &SweepTable, wall_time_s: f64, csv: &str) -> Self {
        Self {
            format: CSV_MAGIC.trim_start_matches("# ").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            spec: spec.clone(),
            r: spec.r_spec().to_string(),
            d: spec.d_spec().to_string(),
            workers,
            rows: table.rows.len(),
            failures: table.failures(),
            wall_time_s,
            csv: csv.to_string(),
        }
    }
}

/// Runs the sweep and writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn run_and_write(
    spec: &SweepSpec,
    workers: Option<usize>,
    dir: &Path,
    stem: &str,
) -> Result<(SweepTable, SweepManifest), SweepError> {
    let start = Instant::now();
    let table = run_sweep(spec, workers)?;
    let csv_name = format!("{stem}.csv");
    let manifest = SweepManifest::new(spec, workers, &table, start.elapsed().as_secs_f64(), &csv_name);
    let io = |path: PathBuf| move |source| SweepError::Io { path, source };
    std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let csv_path = dir.join(&csv_name);
    std::fs::write(&csv_path, table.to_csv()).map_err(io(csv_path.clone()))?;
    let json_path = dir.join(format!("{stem}.json"));
    std::fs::write(&json_path, serde_json::to_string_pretty(&manifest)?).map_err(io(json_path.clone()))?;
    Ok((table, manifest))
}
