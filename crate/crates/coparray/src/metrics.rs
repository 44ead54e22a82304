//! Error functionals and Monte Carlo aggregation: NSE/RMNSE, NSSE/RMN-SSE,
//! and DoA RMSE, reported per (estimator, SNR, Q) cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::linalg::ComplexMatrix;

/// Normalized squared error `||R_hat - R_co||_F^2 / ||R_co||_F^2`.
pub fn nse(estimate: &ComplexMatrix, nominal: &ComplexMatrix) -> Result<f64> {
    if (estimate.rows(), estimate.cols()) != (nominal.rows(), nominal.cols()) {
        return Err(Error::Dimension(format!(
            "estimate {}x{} vs nominal {}x{}",
            estimate.rows(),
            estimate.cols(),
            nominal.rows(),
            nominal.cols()
        )));
    }
    Ok(estimate.sub(nominal).frob_norm_sq() / nominal.frob_norm_sq())
}

/// Normalized squared subspace error
/// `||Q_hat Q_hat^H - Q_co Q_co^H||_F^2 / (2K)` for orthonormal `L' x K`
/// bases.
pub fn nsse(estimate: &ComplexMatrix, nominal: &ComplexMatrix) -> Result<f64> {
    if (estimate.rows(), estimate.cols()) != (nominal.rows(), nominal.cols()) {
        return Err(Error::Dimension(format!(
            "subspace bases differ: {}x{} vs {}x{}",
            estimate.rows(),
            estimate.cols(),
            nominal.rows(),
            nominal.cols()
        )));
    }
    let k = estimate.cols();
    for basis in [estimate, nominal] {
        let gram = basis.adjoint().matmul(basis);
        if gram.sub(&ComplexMatrix::identity(k)).frob_norm() > 1e-6 {
            return Err(Error::Parameter("subspace basis is not orthonormal".into()));
        }
    }
    let p_est = estimate.matmul(&estimate.adjoint());
    let p_nom = nominal.matmul(&nominal.adjoint());
    Ok(p_est.sub(&p_nom).frob_norm_sq() / (2.0 * k as f64))
}

/// One realization's worth of per-estimator measurements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialReport {
    pub realization: usize,
    pub estimator: EstimatorKind,
    pub nse: f64,
    pub nsse: f64,
    pub doa_sq_errors_deg2: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub music_degraded: bool,
}

/// Aggregated cell of the sweep table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub estimator: EstimatorKind,
    pub snr_db: f64,
    pub q: usize,
    pub rmnse: f64,
    pub rmn_sse: f64,
    pub rmse_deg: f64,
    pub n_trials: usize,
    pub convergence_rate: f64,
    pub mean_iters: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<CellSummary>,
}

impl SweepReport {
    pub fn cell(&self, estimator: EstimatorKind, snr_db: f64, q: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && c.snr_db == snr_db && c.q == q)
    }
}

/// Root-mean aggregation of one cell's trial reports.
///
/// Non-converged structured trials are included (their matrices are still
/// valid projected estimates) and show up in `convergence_rate`.
pub fn aggregate(
    estimator: EstimatorKind,
    snr_db: f64,
    q: usize,
    reports: &[TrialReport],
) -> Result<CellSummary> {
    if reports.is_empty() {
        return Err(Error::Parameter(format!(
            "no trial reports for ({}, {snr_db} dB, Q={q})",
            estimator.label()
        )));
    }
    let n = reports.len() as f64;
    let mean_nse = reports.iter().map(|r| r.nse).sum::<f64>() / n;
    let mean_nsse = reports.iter().map(|r| r.nsse).sum::<f64>() / n;
    let k = reports[0].doa_sq_errors_deg2.len().max(1) as f64;
    let mean_sq_deg = reports
        .iter()
        .map(|r| r.doa_sq_errors_deg2.iter().sum::<f64>())
        .sum::<f64>()
        / (n * k);
    let converged = reports.iter().filter(|r| r.converged).count() as f64;
    let mean_iters = reports.iter().map(|r| r.iterations as f64).sum::<f64>() / n;
    Ok(CellSummary {
        estimator,
        snr_db,
        q,
        rmnse: mean_nse.sqrt(),
        rmn_sse: mean_nsse.sqrt(),
        rmse_deg: mean_sq_deg.sqrt(),
        n_trials: reports.len(),
        convergence_rate: converged / n,
        mean_iters,
    })
}

/// CSV serialization with the documented header. Rows appear in cell order.
pub fn write_sweep_csv<W: std::io::Write>(report: &SweepReport, mut w: W) -> Result<()> {
    writeln!(
        w,
        "estimator,snr_db,q,rmnse,rmn_sse,rmse_deg,n_trials,convergence_rate,mean_iters"
    )?;
    for c in &report.cells {
        writeln!(
            w,
            "{},{},{},{:.12e},{:.12e},{:.12e},{},{:.6},{:.6}",
            c.estimator.label(),
            c.snr_db,
            c.q,
            c.rmnse,
            c.rmn_sse,
            c.rmse_deg,
            c.n_trials,
            c.convergence_rate,
            c.mean_iters
        )?;
    }
    Ok(())
}

pub fn write_sweep_json<W: std::io::Write>(report: &SweepReport, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, report)?;
    Ok(())
}

/// Matrix export as CSV of re/im pairs: row `r` holds
/// `re(a_r0),im(a_r0),re(a_r1),im(a_r1),...`.
pub fn write_matrix_csv<W: std::io::Write>(m: &ComplexMatrix, mut w: W) -> Result<()> {
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .flat_map(|c| {
                let z = m[(r, c)];
                [format!("{:.17e}", z.re), format!("{:.17e}", z.im)]
            })
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
