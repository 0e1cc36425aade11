//! Acceptance suite: one PASS/FAIL line per criterion, with wall time
//! checked against each criterion's budget. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qdiff_core::anneal::{run_annealing, AnnealConfig};
use qdiff_core::eigen::{assemble, k_value, principal_eigenpair, OperatorSpec};
use qdiff_core::identities::{
    check_deformation, check_fickian_reduction, identity_presets, lemma_constructions, rayleigh_value,
    variational_maximizer,
};
use qdiff_core::pdesim::{measure_front_speed, SimConfig, Simulator};
use qdiff_core::speed::{persistence, spreading_speed, Direction};
use qdiff_core::sweeps::{run_sweep, Experiment, SweepSpec};
use qdiff_core::{build_periodic_spline, Field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn right(r: &Field, d: &Field, q: f64, tol: f64) -> Result<f64, String> {
    spreading_speed(r, d, q, Direction::Right, tol)
        .map(|s| s.c_star)
        .map_err(|e| format!("q={q}: {e}"))
}

fn k0(r: &Field, d: &Field, q: f64, lambda: f64, tol: f64) -> Result<f64, String> {
    k_value(r, d, q, lambda, tol).map(|k| k.k).map_err(|e| format!("q={q} λ={lambda}: {e}"))
}

/// `(∫₀¹ f)` by the periodic trapezoid rule.
fn trapezoid(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    (0..n).map(|i| f(i as f64 / n as f64)).sum::<f64>() / n as f64
}

fn cos2_d() -> Field {
    Field::cos2(0.1, 1.0, 0.0)
}

fn cos2_r() -> Field {
    Field::cos2(0.0, 1.0, 0.0)
}

fn c01_constant_coefficients() -> Outcome {
    let one = Field::constant(1.0);
    let mut worst: f64 = 0.0;
    for q in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        for lambda in [0.0, 0.5, 2.0] {
            let k = k0(&one, &one, q, lambda, 1e-10)?;
            worst = worst.max((k - (1.0 + lambda * lambda)).abs());
        }
    }
    let c = right(&one, &one, 0.0, 1e-10)?;
    check(
        worst <= 1e-10 && (c - 2.0).abs() <= 1e-8,
        format!("max |k - (1+λ²)| = {worst:.1e}, |c* - 2| = {:.1e}", (c - 2.0).abs()),
    )
}

fn c02_stratonovich_formula() -> Outcome {
    let target = 2.0 / trapezoid(|x| (0.1 + (PI * x).cos().powi(2)).powf(-0.5), 20000);
    let c = right(&Field::constant(1.0), &cos2_d(), 0.5, 1e-8)?;
    let gap = (c / target - 1.0).abs();
    check(gap <= 1e-4, format!("c* = {c:.8}, 2<sqrt D>_H = {target:.8}, rel gap {gap:.1e}"))
}

fn c03_symmetry_and_maximality() -> Outcome {
    let (r, d) = (Field::constant(1.0), cos2_d());
    let mid = right(&r, &d, 0.5, 1e-8)?;
    let mut worst: f64 = 0.0;
    let mut max_side = f64::MIN;
    for qt in [0.25, 0.5, 1.0, 2.0] {
        let lo = right(&r, &d, 0.5 - qt, 1e-8)?;
        let hi = right(&r, &d, 0.5 + qt, 1e-8)?;
        worst = worst.max((lo - hi).abs() / mid);
        max_side = max_side.max(lo.max(hi));
    }
    check(
        worst <= 1e-4 && mid >= max_side,
        format!("max asymmetry {worst:.1e}, c*(1/2) = {mid:.6} vs max other {max_side:.6}"),
    )
}

fn c04_large_q_tail() -> Outcome {
    let c = right(&Field::constant(1.0), &cos2_d(), 50.0, 1e-6)?;
    check(c <= 0.02, format!("c*(q=50) = {c:.5}"))
}

/// The 12-case grid: two presets, q ∈ {−2, 1, 3}, λ ∈ {0, 0.5}.
fn identity_grid() -> Vec<(String, Field, Field, f64, f64)> {
    let mut cases = Vec::new();
    for (label, r, d) in identity_presets() {
        for q in [-2.0, 1.0, 3.0] {
            for lambda in [0.0, 0.5] {
                cases.push((label.to_string(), r.clone(), d.clone(), q, lambda));
            }
        }
    }
    cases
}

fn c05_fickian_reduction() -> Outcome {
    let grid = identity_grid();
    let mut worst: f64 = 0.0;
    for (label, r, d, q, lambda) in &grid {
        let c = check_fickian_reduction(r, d, *q, *lambda, 1e-9).map_err(|e| format!("{label} q={q}: {e}"))?;
        worst = worst.max(c.gap);
    }
    check(grid.len() == 12 && worst <= 1e-6, format!("{} cases, max gap {worst:.1e}", grid.len()))
}

fn c06_deformation() -> Outcome {
    let grid = identity_grid();
    let mut worst: f64 = 0.0;
    for (label, r, d, q, lambda) in &grid {
        let c = check_deformation(r, d, *q, *lambda, 1e-8).map_err(|e| format!("{label} q={q}: {e}"))?;
        worst = worst.max(c.gap);
    }
    check(grid.len() == 12 && worst <= 1e-5, format!("{} cases, max gap {worst:.1e}", grid.len()))
}

fn c07_large_diffusion_limit() -> Outcome {
    let (r, d) = (cos2_r(), cos2_d());
    let big = d.scaled(1000.0);
    let mut worst: f64 = 0.0;
    for q in [-1.0, 1.0, 2.0] {
        let dq = |x: f64| (0.1 + (PI * x).cos().powi(2)).powf(-q);
        let mean = trapezoid(|x| (PI * x).cos().powi(2) * dq(x), 20000) / trapezoid(dq, 20000);
        let k = k0(&r, &big, q, 0.0, 1e-8)?;
        worst = worst.max((k - mean).abs());
    }
    check(worst <= 0.01, format!("max |k - weighted mean| = {worst:.2e}"))
}

fn c08_extreme_q_limits() -> Outcome {
    let (r, d) = (cos2_r(), cos2_d());
    let xs: Vec<f64> = (0..10000).map(|i| i as f64 / 10000.0).collect();
    let argmin = xs.iter().copied().fold(0.0, |b, x| if d.eval(x) < d.eval(b) { x } else { b });
    let argmax = xs.iter().copied().fold(0.0, |b, x| if d.eval(x) > d.eval(b) { x } else { b });
    let plus = persistence(&r, &d, 40.0, 1e-6).map_err(|e| e.to_string())?;
    let minus = persistence(&r, &d, -40.0, 1e-6).map_err(|e| e.to_string())?;
    let (gp, gm) = ((plus - r.eval(argmin)).abs(), (minus - r.eval(argmax)).abs());
    check(
        gp <= 0.05 && gm <= 0.05,
        format!("k(q=40) = {plus:.4} (gap {gp:.3}), k(q=-40) = {minus:.4} (gap {gm:.3})"),
    )
}

fn c09_left_right() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..6 {
        let r = Field::cos2(rng.random_range(0.1..0.5), rng.random_range(0.5..1.5), rng.random_range(0.0..1.0));
        let d = Field::cos2(rng.random_range(0.05..0.5), rng.random_range(0.2..1.5), rng.random_range(0.0..1.0));
        let q = rng.random_range(-1.0..2.5);
        let a = spreading_speed(&r, &d, q, Direction::Right, 1e-8).map_err(|e| e.to_string())?;
        let b = spreading_speed(&r, &d, q, Direction::Left, 1e-8).map_err(|e| e.to_string())?;
        worst = worst.max((a.c_star - b.c_star).abs() / a.c_star);
    }
    check(worst <= 1e-6, format!("6 cases, max rel gap {worst:.1e}"))
}

fn c10_phase_shift_sweep() -> Outcome {
    let omegas: Vec<f64> = (0..=20).map(|i| 0.05 * i as f64).collect();
    let qs = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
    let mut spec = SweepSpec::new(Experiment::KAndCVsOmega, omegas.clone());
    spec.q = qs.to_vec();
    let t = run_sweep(&spec, None).map_err(|e| e.to_string())?;
    if t.failures() > 0 || t.rows.len() != 126 {
        return Err(format!("{} rows, {} failures", t.rows.len(), t.failures()));
    }
    let (qcol, wcol, kcol) = (t.column("q").unwrap(), t.column("omega").unwrap(), t.column("k0").unwrap());
    let mut notes = Vec::new();
    let mut ok = true;
    for q in qs {
        let series: Vec<(f64, f64)> = (0..t.rows.len())
            .filter(|&i| qcol[i] == q)
            .map(|i| (wcol[i], kcol[i]))
            .collect();
        let half: Vec<f64> = series.iter().filter(|(w, _)| *w <= 0.5).map(|(_, k)| *k).collect();
        let lo = series.iter().map(|p| p.1).fold(f64::MAX, f64::min);
        let hi = series.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        let good = if q > 0.0 {
            half.windows(2).all(|w| w[1] > w[0])
        } else if q < 0.0 {
            half.windows(2).all(|w| w[1] < w[0])
        } else {
            hi - lo <= 0.02
        };
        ok &= good && series.len() == 21;
        notes.push(format!("q={q}: {}", if good { "ok" } else { "bad" }));
        if q == 0.0 {
            notes.push(format!("q=0 range {:.2e}", hi - lo));
        }
    }
    check(ok, notes.join(", "))
}

fn c11_front_speeds() -> Outcome {
    let one = Field::constant(1.0);
    let configs = [
        ("KPP", one.clone(), one.clone(), 0.0),
        ("r=1 q=1/2", one.clone(), cos2_d(), 0.5),
        ("in phase q=0", cos2_r(), cos2_d(), 0.0),
        ("out of phase q=1", cos2_r(), Field::cos2(0.1, 1.0, 0.5), 1.0),
    ];
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for (label, r, d, q) in configs {
        let mut cfg = SimConfig::new(&r, &d, q, 100.0);
        cfg.dx = 1.0 / 32.0;
        cfg.domain_length = 256.0;
        cfg.level = 0.1;
        let trace = measure_front_speed(&cfg).map_err(|e| format!("{label}: {e}"))?;
        let target = right(&r, &d, q, 1e-8)?;
        let gap = (trace.fitted_speed / target - 1.0).abs();
        worst = worst.max(gap);
        notes.push(format!("{label} {:.4}/{target:.4}", trace.fitted_speed));
    }
    check(worst <= 0.05, format!("max rel gap {worst:.3}; {}", notes.join(", ")))
}

/// Location of the maximum of the spline through `control`.
fn spline_argmax(control: &[f64; 4]) -> Result<f64, String> {
    let s = build_periodic_spline(control).map_err(|e| e.to_string())?;
    let n = 10000;
    Ok((0..n)
        .map(|i| i as f64 / n as f64)
        .fold(0.0, |b, x| if s.eval(x) > s.eval(b) { x } else { b }))
}

fn wrap_distance(x: f64, target: f64) -> f64 {
    let d = (x - target).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn c12_annealing() -> Outcome {
    let r = cos2_r();
    let fickian_over_fp = run_annealing(&AnnealConfig::new(&r, 0.0, 1.0, 1)).map_err(|e| e.to_string())?;
    let fp_over_fickian = run_annealing(&AnnealConfig::new(&r, 1.0, 0.0, 1)).map_err(|e| e.to_string())?;
    let p0 = spline_argmax(&fickian_over_fp.best_control)?;
    let p1 = spline_argmax(&fp_over_fickian.best_control)?;
    let (d0, d1) = (wrap_distance(p0, 0.0), wrap_distance(p1, 0.5));
    let (a, b) = (fickian_over_fp.best_ratio, fp_over_fickian.best_ratio);
    check(
        a >= 1.3 && b >= 1.10 && d0 <= 0.15 && d1 <= 0.15,
        format!("c0/c1 = {a:.4} (peak {p0:.3}, dist {d0:.3}), c1/c0 = {b:.4} (peak {p1:.3}, dist {d1:.3})"),
    )
}

fn c13_lemma_constructions() -> Outcome {
    let l = lemma_constructions(&cos2_d(), 1.0, 1.0, 1e-9).map_err(|e| e.to_string())?;
    let (p, m) = (l.plus_margin(), l.minus_margin());
    check(p >= 1e-4 && m >= 1e-4, format!("k0 - kq = {p:.4e} (r = 1 + h_q), kq - k0 = {m:.4e} (r = -h_q)"))
}

fn c14_property_suites() -> Outcome {
    let (r, d) = (cos2_r(), cos2_d());
    let mut failed = Vec::new();

    // convexity in λ
    for q in [-1.0, 0.0, 1.0] {
        let ks: Vec<f64> = (0..=8).map(|i| k0(&r, &d, q, -1.0 + 0.25 * i as f64, 1e-9)).collect::<Result<_, _>>()?;
        if !ks.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -1e-8) {
            failed.push(format!("convexity q={q}"));
        }
    }

    // adjoint equality
    let m = assemble(&OperatorSpec::new(&r, &d, 2.0, 0.7, 512)).map_err(|e| e.to_string())?;
    let a = principal_eigenpair(&m, None).map_err(|e| e.to_string())?.k;
    let b = principal_eigenpair(&m.transpose(), None).map_err(|e| e.to_string())?.k;
    if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
        failed.push("adjoint".into());
    }

    // Rayleigh maximality
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for q in [-1.0, 0.0, 1.0] {
        let k = k0(&r, &d, q, 0.0, 1e-9)?;
        let e = principal_eigenpair(&assemble(&OperatorSpec::new(&r, &d, q, 0.0, 4096)).unwrap(), None)
            .map_err(|e| e.to_string())?;
        let phi = variational_maximizer(&d, q, &e.phi, 1.0).map_err(|e| e.to_string())?;
        let at_max = rayleigh_value(&r, &d, q, &phi).map_err(|e| e.to_string())?;
        let mut ok = (at_max - k).abs() < 1e-6;
        for _ in 0..20 {
            let trial = Field::cos2(rng.random_range(0.05..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            ok &= rayleigh_value(&r, &d, q, &trial).map_err(|e| e.to_string())? <= k + 1e-6;
        }
        if !ok {
            failed.push(format!("rayleigh q={q}"));
        }
    }

    // mass conservation without reaction
    let mut cfg = SimConfig::new(&Field::constant(0.0), &Field::cos2(0.1, 1.0, 0.3), 0.7, 1.0);
    cfg.domain_length = 40.0;
    cfg.dx = 1.0 / 16.0;
    let mut sim = Simulator::new(&cfg).map_err(|e| e.to_string())?;
    sim.set_reaction(false);
    let mut u: Vec<f64> = (0..=sim.n).map(|i| (-(i as f64 * cfg.dx - 20.0).powi(2)).exp()).collect();
    let mass = |u: &[f64]| u.iter().sum::<f64>() * cfg.dx;
    let m0 = mass(&u);
    for _ in 0..500 {
        sim.step(&mut u).map_err(|(i, v)| format!("step blew up at node {i}: {v}"))?;
    }
    if (mass(&u) - m0).abs() > 1e-11 {
        failed.push(format!("mass drift {:.1e}", mass(&u) - m0));
    }

    // second-order grid convergence
    let exact = k0(&r, &d, 1.0, 0.5, 1e-10)?;
    let errs: Vec<f64> = [256, 512, 1024, 2048]
        .iter()
        .map(|&n| {
            let m = assemble(&OperatorSpec::new(&r, &d, 1.0, 0.5, n)).unwrap();
            principal_eigenpair(&m, None).map(|e| (e.k - exact).abs())
        })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    if !errs.windows(2).all(|w| (3.0..=5.0).contains(&(w[0] / w[1]))) {
        failed.push(format!("convergence errors {errs:?}"));
    }

    // sweep determinism across worker counts
    let mut spec = SweepSpec::new(Experiment::KAndCVsOmega, vec![0.0, 0.25, 0.5]);
    spec.q = vec![0.0, 1.0];
    let one = run_sweep(&spec, Some(1)).map_err(|e| e.to_string())?.to_csv();
    let three = run_sweep(&spec, Some(3)).map_err(|e| e.to_string())?.to_csv();
    if one != three {
        failed.push("sweep determinism".into());
    }

    if failed.is_empty() {
        Ok("convexity, adjoint, rayleigh, mass, convergence, determinism".into())
    } else {
        Err(failed.join("; "))
    }
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, name: "constant-coefficient exactness", budget: Some(secs(1)), run: c01_constant_coefficients },
        Criterion { id: 2, name: "speed at q=1/2 equals 2<sqrt D>_H", budget: Some(secs(10)), run: c02_stratonovich_formula },
        Criterion { id: 3, name: "symmetry and maximality about q=1/2", budget: Some(secs(60)), run: c03_symmetry_and_maximality },
        Criterion { id: 4, name: "speed at q=50 is small", budget: Some(secs(120)), run: c04_large_q_tail },
        Criterion { id: 5, name: "Fickian reduction via h_q", budget: Some(secs(60)), run: c05_fickian_reduction },
        Criterion { id: 6, name: "deformation to constant harmonic structure", budget: Some(secs(60)), run: c06_deformation },
        Criterion { id: 7, name: "large-diffusion weighted mean", budget: Some(secs(60)), run: c07_large_diffusion_limit },
        Criterion { id: 8, name: "persistence limits q -> +-40", budget: Some(secs(300)), run: c08_extreme_q_limits },
        Criterion { id: 9, name: "left and right speeds agree", budget: Some(secs(60)), run: c09_left_right },
        Criterion { id: 10, name: "phase-shift sweep trends", budget: Some(secs(300)), run: c10_phase_shift_sweep },
        Criterion { id: 11, name: "simulated fronts match speed formula", budget: Some(secs(600)), run: c11_front_speeds },
        Criterion { id: 12, name: "annealed spline speed ratios", budget: Some(secs(1800)), run: c12_annealing },
        Criterion { id: 13, name: "lemma constructions q=1", budget: Some(secs(60)), run: c13_lemma_constructions },
        Criterion { id: 14, name: "property suites", budget: None, run: c14_property_suites },
    ];

    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let over = c.budget.is_some_and(|b| elapsed > b);
        let (passed, detail) = match outcome {
            Ok(d) => (!over, d),
            Err(d) => (false, d),
        };
        let budget = c.budget.map_or(String::new(), |b| format!(" / {} s", b.as_secs()));
        let timing = format!("{:.2} s{budget}{}", elapsed.as_secs_f64(), if over { " OVER BUDGET" } else { "" });
        println!("{} {:>2} {} ({timing}): {detail}", if passed { "PASS" } else { "FAIL" }, c.id, c.name);
        if !passed {
            failures += 1;
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
