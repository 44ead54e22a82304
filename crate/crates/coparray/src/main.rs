//! Experiment CLI: snapshot dumps, single-estimate certificates, MUSIC
//! spectra, and Monte Carlo sweeps driven by a JSON config.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coparray::array::{nominal_coarray_cov, nominal_phys_cov};
use coparray::error::Result;
use coparray::estimators::{structure_certificate, EstimatorKind};
use coparray::harness::{estimate_matrix, run_sweep, ExperimentConfig};
use coparray::metrics::{write_matrix_csv, write_sweep_csv, write_sweep_json};
use coparray::music::{music_spectrum, subspace_split, write_spectrum_csv};
use coparray::snapshot::{sample_covariance, simulate_snapshots, write_snapshots};

#[derive(Parser)]
#[command(name = "coparray", about = "Coprime-array coarray estimation experiments")]
struct Cli {
    /// Path to the JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker thread count (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Trials-per-cell override.
    #[arg(long, global = true)]
    trials: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one cell's snapshots and dump them to a binary file.
    Simulate {
        /// SNR cell to simulate (defaults to the first in the sweep).
        #[arg(long)]
        snr: Option<f64>,
        /// Sample support to simulate (defaults to the first in the sweep).
        #[arg(long)]
        q: Option<usize>,
    },
    /// Compute one coarray estimate and print its structure certificate.
    Estimate {
        #[arg(long, value_enum, default_value = "structured")]
        estimator: EstimatorArg,
        /// Feed nominal statistics instead of sampled snapshots.
        #[arg(long)]
        nominal: bool,
    },
    /// Dump the MUSIC pseudospectrum of one estimate to CSV.
    Music {
        #[arg(long, value_enum, default_value = "structured")]
        estimator: EstimatorArg,
        #[arg(long)]
        nominal: bool,
    },
    /// Run the full Monte Carlo sweep and write CSV/JSON reports.
    Sweep,
    /// Run the built-in invariant self-checks.
    Check,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EstimatorArg {
    AmSelection,
    AmAveraging,
    Psr,
    Structured,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(a: EstimatorArg) -> Self {
        match a {
            EstimatorArg::AmSelection => EstimatorKind::AmSelection,
            EstimatorArg::AmAveraging => EstimatorKind::AmAveraging,
            EstimatorArg::Psr => EstimatorKind::Psr,
            EstimatorArg::Structured => EstimatorKind::Structured,
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| {
        coparray::Error::Validation("--config PATH is required for this command".into())
    })?;
    let mut cfg = ExperimentConfig::from_json_file(path)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.sweep.n_trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn covariance_for(
    cfg: &ExperimentConfig,
    nominal: bool,
) -> Result<(
    coparray::array::CoprimeGeometry,
    coparray::array::Scenario,
    coparray::linalg::ComplexMatrix,
)> {
    let geom = cfg.build_geometry()?;
    let scenario = cfg.scenario_for(&geom, cfg.sweep.snr_db[0], cfg.sweep.q[0], 0)?;
    let r_y = if nominal {
        nominal_phys_cov(&geom, &scenario)
    } else {
        sample_covariance(&simulate_snapshots(&geom, &scenario)?)?
    };
    Ok((geom, scenario, r_y))
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| coparray::Error::Validation(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out)?;

    match &cli.command {
        Command::Simulate { snr, q } => {
            let cfg = load_config(cli)?;
            let geom = cfg.build_geometry()?;
            let snr = snr.unwrap_or(cfg.sweep.snr_db[0]);
            let q = q.unwrap_or(cfg.sweep.q[0]);
            let scenario = cfg.scenario_for(&geom, snr, q, 0)?;
            let set = simulate_snapshots(&geom, &scenario)?;
            let path = cli.out.join(format!("snapshots_snr{snr}_q{q}.bin"));
            write_snapshots(&set, BufWriter::new(File::create(&path)?))?;
            eprintln!(
                "wrote {} snapshots of {} elements to {}",
                set.num_snapshots(),
                set.num_elements(),
                path.display()
            );
        }
        Command::Estimate { estimator, nominal } => {
            let cfg = load_config(cli)?;
            let (geom, scenario, r_y) = covariance_for(&cfg, *nominal)?;
            let k = scenario.num_sources();
            let kind: EstimatorKind = (*estimator).into();
            let st_cfg = cfg.structured_config(k);
            let (matrix, converged, iterations) = estimate_matrix(&geom, &r_y, kind, &st_cfg)?;
            let cert = structure_certificate(&matrix, k)?;
            println!("estimator: {}", kind.label());
            println!("converged: {converged} (iterations: {iterations})");
            println!("hermitian_asymmetry: {:.6e}", cert.hermitian_asymmetry);
            println!("min_eigenvalue: {:.6e}", cert.min_eigenvalue);
            println!("toeplitz_deviation: {:.6e}", cert.toeplitz_deviation);
            println!(
                "noise_eigenvalue_spread: {:.6e}",
                cert.noise_eigenvalue_spread
            );
            let nom = nominal_coarray_cov(&geom, &scenario);
            println!(
                "nse_vs_nominal: {:.6e}",
                coparray::metrics::nse(&matrix, &nom)?
            );
            let path = cli.out.join(format!("estimate_{}.csv", kind.label()));
            write_matrix_csv(&matrix, BufWriter::new(File::create(&path)?))?;
            eprintln!("matrix written to {}", path.display());
        }
        Command::Music { estimator, nominal } => {
            let cfg = load_config(cli)?;
            let (geom, scenario, r_y) = covariance_for(&cfg, *nominal)?;
            let k = scenario.num_sources();
            let kind: EstimatorKind = (*estimator).into();
            let st_cfg = cfg.structured_config(k);
            let (matrix, _, _) = estimate_matrix(&geom, &r_y, kind, &st_cfg)?;
            let split = subspace_split(&matrix, k)?;
            let res = music_spectrum(&split, &geom, cfg.music.grid_step_deg)?;
            let path = cli.out.join(format!("spectrum_{}.csv", kind.label()));
            write_spectrum_csv(&res, BufWriter::new(File::create(&path)?))?;
            println!(
                "estimates_deg: {}",
                res.estimates_deg
                    .iter()
                    .map(|t| format!("{t:.2}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            eprintln!("spectrum written to {}", path.display());
        }
        Command::Sweep => {
            let cfg = load_config(cli)?;
            let report = run_sweep(&cfg, true)?;
            let csv_path = cli.out.join("sweep.csv");
            write_sweep_csv(&report, BufWriter::new(File::create(&csv_path)?))?;
            let json_path = cli.out.join("sweep.json");
            write_sweep_json(&report, BufWriter::new(File::create(&json_path)?))?;
            eprintln!(
                "sweep written to {} and {}",
                csv_path.display(),
                json_path.display()
            );
        }
        Command::Check => {
            self_check()?;
            println!("all self-checks passed");
        }
    }
    Ok(())
}

/// Quick invariant self-test: nominal-statistics coincidence, projection
/// idempotence, and the convergence norm chain on one seeded trial.
fn self_check() -> Result<()> {
    use coparray::estimators::{
        estimate_am, estimate_psr, estimate_structured, nearest_psd, nearest_toeplitz,
        StructuredConfig,
    };
    use coparray::sampling::SamplingKind;

    let geom = coparray::array::CoprimeGeometry::build(2, 3)?;
    let scenario = coparray::array::Scenario {
        thetas_deg: vec![-43.0, -21.0, -10.0, 17.0, 29.0, 54.0],
        powers: vec![1.0; 6],
        noise_var: 1.0,
        snapshots: 50,
        seed: 7,
    };
    let r_y = nominal_phys_cov(&geom, &scenario);
    let r_co = nominal_coarray_cov(&geom, &scenario);
    let tol = 1e-8 * r_co.frob_norm();
    let cfg = StructuredConfig::new(scenario.num_sources());

    let checks: Vec<(&str, f64)> = vec![
        (
            "am_selection == R_co (nominal)",
            estimate_am(&geom, &r_y, SamplingKind::Selection)?
                .sub(&r_co)
                .frob_norm(),
        ),
        (
            "am_averaging == R_co (nominal)",
            estimate_am(&geom, &r_y, SamplingKind::Averaging)?
                .sub(&r_co)
                .frob_norm(),
        ),
        (
            "psr == R_co (nominal)",
            estimate_psr(&geom, &r_y, SamplingKind::Selection)?
                .sub(&r_co)
                .frob_norm(),
        ),
        (
            "structured == R_co (nominal)",
            estimate_structured(&geom, &r_y, &cfg)?.matrix.sub(&r_co).frob_norm(),
        ),
    ];
    for (name, err) in &checks {
        let ok = *err < tol;
        println!("[{}] {name} (residual {err:.3e})", if ok { "pass" } else { "FAIL" });
        if !ok {
            return Err(coparray::Error::Validation(format!("self-check failed: {name}")));
        }
    }

    // projection idempotence and the norm chain on a sampled trial
    let set = simulate_snapshots(&geom, &scenario)?;
    let r_hat = sample_covariance(&set)?;
    let t = nearest_toeplitz(&r_hat);
    assert!(nearest_toeplitz(&t).sub(&t).frob_norm() < 1e-10);
    let p = nearest_psd(&r_hat)?;
    assert!(nearest_psd(&p)?.sub(&p).frob_norm() < 1e-10);
    println!("[pass] projection idempotence");

    let res = estimate_structured(&geom, &r_hat, &cfg)?;
    let flat: Vec<f64> = res
        .norm_trace
        .iter()
        .flat_map(|t| [t.toeplitz, t.psd, t.corrected])
        .collect();
    let monotone = flat.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    println!(
        "[{}] norm trace non-increasing over {} iterations",
        if monotone { "pass" } else { "FAIL" },
        res.iterations
    );
    if !monotone {
        return Err(coparray::Error::Validation("norm chain violated".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
