//! End-to-end pipeline checks on a small geometry, plus the shipped
//! experiment configs.

use std::path::PathBuf;

use coparray::array::{nominal_coarray_cov, CoprimeGeometry, Scenario};
use coparray::estimators::{estimate_structured, EstimatorKind, StructuredConfig};
use coparray::harness::{run_sweep, run_trial, ExperimentConfig};
use coparray::metrics::{write_matrix_csv, write_sweep_csv};
use coparray::music::{music_spectrum, subspace_split};
use coparray::snapshot::{sample_covariance, simulate_snapshots};

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../configs/{name}"))
}

#[test]
fn shipped_configs_are_valid() {
    let ci = ExperimentConfig::from_json_file(&config_path("ci.json")).unwrap();
    assert_eq!(ci.sweep.n_trials, 200);
    assert_eq!(ci.scenario.thetas_deg.len(), 13);

    let full = ExperimentConfig::from_json_file(&config_path("full.json")).unwrap();
    assert_eq!(full.sweep.n_trials, 3000);
    assert_eq!(full.sweep.q, vec![150, 300, 450, 600]);
    assert_eq!(full.sweep.snr_db, vec![-4.0, 2.0]);
    // identical protocol, different trial budget
    assert_eq!(full.master_seed, ci.master_seed);
}

fn tiny_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_json_file(&config_path("ci.json")).unwrap();
    cfg.geometry.m = 2;
    cfg.geometry.n = 3;
    cfg.scenario.thetas_deg = vec![-40.0, -5.0, 30.0, 62.0];
    cfg.sweep.q = vec![80];
    cfg.sweep.snr_db = vec![0.0];
    cfg.sweep.n_trials = 8;
    cfg.music.grid_step_deg = 0.2;
    cfg.validate().unwrap();
    cfg
}

#[test]
fn small_sweep_end_to_end() {
    let cfg = tiny_config();
    let report = run_sweep(&cfg, false).unwrap();
    assert_eq!(report.cells.len(), 4);
    for cell in &report.cells {
        assert_eq!(cell.n_trials, 8);
        assert!(cell.rmnse.is_finite() && cell.rmnse > 0.0);
        assert!(cell.rmn_sse >= 0.0 && cell.rmn_sse <= 1.0);
    }
    // structured converges and iterates at this scale
    let st = report.cell(EstimatorKind::Structured, 0.0, 80).unwrap();
    assert_eq!(st.convergence_rate, 1.0);
    assert!(st.mean_iters >= 1.0);

    let mut csv = Vec::new();
    write_sweep_csv(&report, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 5);
}

#[test]
fn trial_reports_are_per_estimator() {
    let cfg = tiny_config();
    let geom = cfg.build_geometry().unwrap();
    let reports = run_trial(&cfg, &geom, 0.0, 80, 3).unwrap();
    assert_eq!(reports.len(), 4);
    for r in &reports {
        assert_eq!(r.realization, 3);
        assert_eq!(r.doa_sq_errors_deg2.len(), 4);
        assert!(r.nse >= 0.0);
    }
}

#[test]
fn structured_then_music_recovers_well_separated_sources() {
    let geom = CoprimeGeometry::build(2, 3).unwrap();
    let scenario = Scenario {
        thetas_deg: vec![-35.0, 20.0],
        powers: vec![2.0, 2.0],
        noise_var: 1.0,
        snapshots: 400,
        seed: 314,
    };
    let set = simulate_snapshots(&geom, &scenario).unwrap();
    let r_y = sample_covariance(&set).unwrap();
    let res = estimate_structured(&geom, &r_y, &StructuredConfig::new(2)).unwrap();
    assert!(res.converged);
    let split = subspace_split(&res.matrix, 2).unwrap();
    let music = music_spectrum(&split, &geom, 0.05).unwrap();
    assert!(!music.degraded);
    assert!((music.estimates_deg[0] + 35.0).abs() < 2.0);
    assert!((music.estimates_deg[1] - 20.0).abs() < 2.0);
}

#[test]
fn matrix_csv_is_parseable_re_im_pairs() {
    let geom = CoprimeGeometry::build(1, 2).unwrap();
    let scenario = Scenario {
        thetas_deg: vec![10.0],
        powers: vec![1.0],
        noise_var: 0.5,
        snapshots: 1,
        seed: 0,
    };
    let r = nominal_coarray_cov(&geom, &scenario);
    let mut buf = Vec::new();
    write_matrix_csv(&r, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), r.rows());
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 2 * r.cols());
        for c in 0..r.cols() {
            assert!((fields[2 * c] - r[(i, c)].re).abs() < 1e-15);
            assert!((fields[2 * c + 1] - r[(i, c)].im).abs() < 1e-15);
        }
    }
}
