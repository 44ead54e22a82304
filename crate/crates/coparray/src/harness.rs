//! Experiment configuration and Monte Carlo sweep orchestration across
//! estimators, SNR levels, and sample supports.
//!
//! Trials are independent work items; the per-trial seed is derived from
//! the master seed and the (snr, q, trial) cell indices, so results are
//! identical regardless of thread count or execution order.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{nominal_coarray_cov, CoprimeGeometry, Scenario};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_am, estimate_psr, estimate_structured, EstimatorKind, StructuredConfig,
};
use crate::linalg::ComplexMatrix;
use crate::metrics::{aggregate, nse, nsse, SweepReport, TrialReport};
use crate::music::{match_doas, music_spectrum, subspace_split};
use crate::sampling::SamplingKind;
use crate::snapshot::{derive_trial_seed, sample_covariance, simulate_snapshots};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub m: u32,
    pub n: u32,
}

/// Scenario template; per-cell source power comes from the SNR sweep
/// (`SNR = source power in dB` with the noise power fixed, both in dB).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioTemplate {
    pub thetas_deg: Vec<f64>,
    #[serde(default)]
    pub noise_power_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub snr_db: Vec<f64>,
    pub q: Vec<usize>,
    pub n_trials: usize,
}

/// One estimator entry of the config's estimator list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Convergence threshold override for the structured estimator.
    #[serde(default)]
    pub eps_rel: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MusicConfig {
    pub grid_step_deg: f64,
}

impl Default for MusicConfig {
    fn default() -> Self {
        Self { grid_step_deg: 0.05 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub geometry: GeometryConfig,
    pub scenario: ScenarioTemplate,
    pub sweep: SweepConfig,
    pub estimators: Vec<EstimatorConfig>,
    #[serde(default)]
    pub music: MusicConfig,
    pub master_seed: u64,
    /// Feed the nominal covariance instead of sampled snapshots (debug path).
    #[serde(default)]
    pub nominal_statistics: bool,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.estimators.is_empty() {
            return Err(Error::Validation("estimator list is empty".into()));
        }
        if self.sweep.n_trials == 0 {
            return Err(Error::Validation("n_trials must be >= 1".into()));
        }
        if self.sweep.snr_db.is_empty() || self.sweep.q.is_empty() {
            return Err(Error::Validation("sweep lists must be non-empty".into()));
        }
        if !self.music.grid_step_deg.is_finite() || self.music.grid_step_deg <= 0.0 {
            return Err(Error::Validation("MUSIC grid step must be positive".into()));
        }
        let geom = self.build_geometry()?;
        self.scenario_for(&geom, self.sweep.snr_db[0], self.sweep.q[0], 0)?
            .validate(&geom)?;
        Ok(())
    }

    pub fn build_geometry(&self) -> Result<CoprimeGeometry> {
        CoprimeGeometry::build(self.geometry.m, self.geometry.n)
    }

    /// Concrete scenario for one sweep cell and trial index.
    pub fn scenario_for(
        &self,
        geom: &CoprimeGeometry,
        snr_db: f64,
        q: usize,
        trial: usize,
    ) -> Result<Scenario> {
        let snr_index = self
            .sweep
            .snr_db
            .iter()
            .position(|&s| s == snr_db)
            .ok_or_else(|| Error::Validation(format!("SNR {snr_db} not in sweep")))?;
        let q_index = self
            .sweep
            .q
            .iter()
            .position(|&qq| qq == q)
            .ok_or_else(|| Error::Validation(format!("Q {q} not in sweep")))?;
        let noise_var = db_to_linear(self.scenario.noise_power_db);
        let source_power = db_to_linear(snr_db + self.scenario.noise_power_db);
        let sc = Scenario {
            thetas_deg: self.scenario.thetas_deg.clone(),
            powers: vec![source_power; self.scenario.thetas_deg.len()],
            noise_var,
            snapshots: q,
            seed: derive_trial_seed(self.master_seed, snr_index, q_index, trial),
        };
        sc.validate(geom)?;
        Ok(sc)
    }

    pub fn structured_config(&self, signal_dim: usize) -> StructuredConfig {
        let mut cfg = StructuredConfig::new(signal_dim);
        if let Some(e) = self
            .estimators
            .iter()
            .find(|e| e.kind == EstimatorKind::Structured)
        {
            if let Some(eps) = e.eps_rel {
                cfg.eps_rel = eps;
            }
            if let Some(mi) = e.max_iters {
                cfg.max_iters = mi;
            }
        }
        cfg
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Computes one estimator's matrix from a shared sample covariance.
pub fn estimate_matrix(
    geom: &CoprimeGeometry,
    r_y: &ComplexMatrix,
    kind: EstimatorKind,
    structured_cfg: &StructuredConfig,
) -> Result<(ComplexMatrix, bool, usize)> {
    match kind {
        EstimatorKind::AmSelection => {
            Ok((estimate_am(geom, r_y, SamplingKind::Selection)?, true, 0))
        }
        EstimatorKind::AmAveraging => {
            Ok((estimate_am(geom, r_y, SamplingKind::Averaging)?, true, 0))
        }
        EstimatorKind::Psr => Ok((estimate_psr(geom, r_y, SamplingKind::Selection)?, true, 0)),
        EstimatorKind::Structured => {
            let res = estimate_structured(geom, r_y, structured_cfg)?;
            Ok((res.matrix, res.converged, res.iterations))
        }
    }
}

/// Runs one realization: simulate once, then evaluate every configured
/// estimator on the identical snapshot set.
pub fn run_trial(
    config: &ExperimentConfig,
    geom: &CoprimeGeometry,
    snr_db: f64,
    q: usize,
    trial: usize,
) -> Result<Vec<TrialReport>> {
    let scenario = config.scenario_for(geom, snr_db, q, trial)?;
    let k = scenario.num_sources();
    let r_co = nominal_coarray_cov(geom, &scenario);
    let nominal_split = subspace_split(&r_co, k)?;

    let r_y = if config.nominal_statistics {
        crate::array::nominal_phys_cov(geom, &scenario)
    } else {
        let set = simulate_snapshots(geom, &scenario)?;
        sample_covariance(&set)?
    };

    let structured_cfg = config.structured_config(k);
    let mut reports = Vec::with_capacity(config.estimators.len());
    for est in &config.estimators {
        let (matrix, converged, iterations) =
            estimate_matrix(geom, &r_y, est.kind, &structured_cfg)?;
        let split = subspace_split(&matrix, k)?;
        let music = music_spectrum(&split, geom, config.music.grid_step_deg)?;
        let doa_sq_errors = match_doas(&music.estimates_deg, &scenario.thetas_deg)?;
        reports.push(TrialReport {
            realization: trial,
            estimator: est.kind,
            nse: nse(&matrix, &r_co)?,
            nsse: nsse(&split.signal_basis, &nominal_split.signal_basis)?,
            doa_sq_errors_deg2: doa_sq_errors,
            converged,
            iterations,
            music_degraded: music.degraded,
        });
    }
    Ok(reports)
}

/// Full sweep over (SNR, Q) cells. Trials run in parallel on the rayon
/// pool; per-trial seeds and ordered collection keep the output
/// independent of thread count.
pub fn run_sweep(config: &ExperimentConfig, progress: bool) -> Result<SweepReport> {
    config.validate()?;
    let geom = config.build_geometry()?;
    let mut cells = Vec::new();
    for &snr_db in &config.sweep.snr_db {
        for &q in &config.sweep.q {
            if progress {
                eprintln!(
                    "cell snr={snr_db} dB q={q}: running {} trials",
                    config.sweep.n_trials
                );
            }
            let trial_reports: Vec<Vec<TrialReport>> = (0..config.sweep.n_trials)
                .into_par_iter()
                .map(|trial| run_trial(config, &geom, snr_db, q, trial))
                .collect::<Result<_>>()?;
            for est in &config.estimators {
                let per_est: Vec<TrialReport> = trial_reports
                    .iter()
                    .flatten()
                    .filter(|r| r.estimator == est.kind)
                    .cloned()
                    .collect();
                cells.push(aggregate(est.kind, snr_db, q, &per_est)?);
            }
        }
    }
    Ok(SweepReport { cells })
}
