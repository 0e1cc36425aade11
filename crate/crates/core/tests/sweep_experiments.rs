//! Sweep experiments: symmetry and monotone trends of the figure setups,
//! and bit-identical output across worker counts.

use qdiff_core::sweeps::{run_and_write, run_sweep, Experiment, SweepManifest, SweepSpec};
use qdiff_core::FieldSpec;

#[test]
fn speed_vs_q_is_symmetric_about_one_half() {
    let grid: Vec<f64> = (0..=20).map(|i| -2.0 + 0.25 * i as f64).collect();
    let t = run_sweep(&SweepSpec::new(Experiment::SpeedVsQ, grid.clone()), None).unwrap();
    assert_eq!(t.failures(), 0);
    let c = t.column("c_star").unwrap();
    let max = c.iter().cloned().fold(f64::MIN, f64::max);
    // q and 1 − q sit at indices i and 20 − i
    for i in 0..=10 {
        let j = 20 - i;
        assert!((grid[i] + grid[j] - 1.0).abs() < 1e-12);
        assert!((c[i] - c[j]).abs() <= 1e-4 * max, "q={} {} vs {}", grid[i], c[i], c[j]);
    }
    // interior maximum at q = 1/2, tails below it
    let imax = c.iter().enumerate().fold(0, |b, (i, v)| if *v > c[b] { i } else { b });
    assert_eq!(grid[imax], 0.5);
    assert!(c[0] < max && c[20] < max);
}

#[test]
fn omega_sweep_trends() {
    let omegas: Vec<f64> = (0..=10).map(|i| 0.05 * i as f64).collect();
    let mut s = SweepSpec::new(Experiment::KAndCVsOmega, omegas);
    s.q = vec![-1.0, 0.0, 1.0];
    s.tolerance = 1e-6;
    let t = run_sweep(&s, None).unwrap();
    assert_eq!(t.failures(), 0);
    let q = t.column("q").unwrap();
    let k = t.column("k0").unwrap();
    let col = |qq: f64| -> Vec<f64> { q.iter().zip(&k).filter(|(a, _)| **a == qq).map(|(_, v)| *v).collect() };
    let (neg, zero, pos) = (col(-1.0), col(0.0), col(1.0));
    let range = zero.iter().cloned().fold(f64::MIN, f64::max) - zero.iter().cloned().fold(f64::MAX, f64::min);
    assert!(range <= 0.02, "{range}");
    assert!(pos.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    assert!(neg.windows(2).all(|w| w[1] <= w[0] + 1e-9));
}

#[test]
fn k_vs_q_is_monotone_in_and_out_of_phase() {
    let grid: Vec<f64> = (0..=8).map(|i| -2.0 + 0.5 * i as f64).collect();
    let mut s = SweepSpec::new(Experiment::KVsQ, grid);
    s.omega = vec![0.0, 0.5];
    let t = run_sweep(&s, None).unwrap();
    let w = t.column("omega").unwrap();
    let k = t.column("k0").unwrap();
    let same: Vec<f64> = w.iter().zip(&k).filter(|(a, _)| **a == 0.0).map(|(_, v)| *v).collect();
    let opposed: Vec<f64> = w.iter().zip(&k).filter(|(a, _)| **a == 0.5).map(|(_, v)| *v).collect();
    assert!(same.windows(2).all(|p| p[1] < p[0]));
    assert!(opposed.windows(2).all(|p| p[1] > p[0]));
}

#[test]
fn k_vs_b_approaches_weighted_mean() {
    let mut s = SweepSpec::new(Experiment::KVsB, vec![1.0, 10.0, 100.0, 1000.0]);
    s.q = vec![1.0];
    let t = run_sweep(&s, None).unwrap();
    let k = t.column("k0").unwrap();
    // ∫ r D^{-1} / ∫ D^{-1} for r = cos², D = 0.1 + cos²
    let n = 20000;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let c = (std::f64::consts::PI * i as f64 / n as f64).cos().powi(2);
        num += c / (0.1 + c);
        den += 1.0 / (0.1 + c);
    }
    let target = num / den;
    assert!((k[3] - target).abs() <= 0.01, "{} vs {target}", k[3]);
    assert!((k[3] - target).abs() < (k[0] - target).abs());
}

#[test]
fn lemma_margins_have_the_right_sign() {
    let s = SweepSpec::new(Experiment::LemmaConstructions, vec![1.0]);
    let t = run_sweep(&s, None).unwrap();
    assert_eq!(t.failures(), 0);
    assert!(t.column("plus_margin").unwrap()[0] >= 1e-4);
    assert!(t.column("minus_margin").unwrap()[0] >= 1e-4);
}

#[test]
fn output_is_identical_across_worker_counts() {
    let mut s = SweepSpec::new(Experiment::KAndCVsOmega, vec![0.0, 0.125, 0.25]);
    s.q = vec![0.5, 2.0];
    s.r = Some(FieldSpec::Cos2 {
        offset: 0.0,
        amplitude: 1.0,
        phase: 0.0,
    });
    let one = run_sweep(&s, Some(1)).unwrap().to_csv();
    let four = run_sweep(&s, Some(4)).unwrap().to_csv();
    assert_eq!(one, four);
    let again = run_sweep(&s, Some(1)).unwrap().to_csv();
    assert_eq!(one, again);
}

#[test]
fn files_and_manifest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = SweepSpec::new(Experiment::KVsQ, vec![0.0, 1.0]);
    s.tolerance = 1e-6;
    let (table, manifest) = run_and_write(&s, Some(2), dir.path(), "kq").unwrap();
    let csv = std::fs::read_to_string(dir.path().join("kq.csv")).unwrap();
    assert_eq!(csv, table.to_csv());
    assert!(csv.starts_with("# qdiff-sweep v1\n"));
    let json = std::fs::read_to_string(dir.path().join("kq.json")).unwrap();
    let back: SweepManifest = serde_json::from_str(&json).unwrap();
    assert_eq!(back, manifest);
    assert_eq!(back.spec, s);
}
