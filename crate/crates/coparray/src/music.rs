//! Subspace extraction and MUSIC spectrum / peak-picking DoA estimation on
//! a coarray covariance estimate.

use num_complex::Complex64;

use crate::array::CoprimeGeometry;
use crate::error::{Error, Result};
use crate::linalg::{herm_evd, ComplexMatrix};

/// Signal/noise eigenvector split of a Hermitian coarray estimate.
#[derive(Debug, Clone)]
pub struct SubspaceSplit {
    /// `L' x K`, top-K eigenvectors by descending eigenvalue.
    pub signal_basis: ComplexMatrix,
    /// `L' x (L' - K)`, the remaining eigenvectors.
    pub noise_basis: ComplexMatrix,
    pub eigenvalues: Vec<f64>,
}

impl SubspaceSplit {
    pub fn signal_dim(&self) -> usize {
        self.signal_basis.cols()
    }

    /// `Q_sig Q_sig^H`.
    pub fn signal_projector(&self) -> ComplexMatrix {
        self.signal_basis.matmul(&self.signal_basis.adjoint())
    }
}

/// Splits the symmetrized input into signal (top-K) and noise eigenvector
/// bases by descending eigenvalue.
pub fn subspace_split(r: &ComplexMatrix, signal_dim: usize) -> Result<SubspaceSplit> {
    let d = r.rows();
    if signal_dim >= d {
        return Err(Error::Parameter(format!(
            "signal dimension {signal_dim} must be < matrix dimension {d}"
        )));
    }
    let pair = herm_evd(&r.symmetrize())?;
    let signal_basis =
        ComplexMatrix::from_fn(d, signal_dim, |row, col| pair.vectors[(row, col)]);
    let noise_basis = ComplexMatrix::from_fn(d, d - signal_dim, |row, col| {
        pair.vectors[(row, col + signal_dim)]
    });
    Ok(SubspaceSplit {
        signal_basis,
        noise_basis,
        eigenvalues: pair.values,
    })
}

/// MUSIC pseudospectrum on a uniform angle grid over `(-90, 90]` degrees.
#[derive(Debug, Clone)]
pub struct MusicResult {
    pub grid_deg: Vec<f64>,
    pub spectrum: Vec<f64>,
    /// The K estimated DoAs, sorted ascending, each on the grid.
    pub estimates_deg: Vec<f64>,
    /// Set when fewer than K local maxima existed and the estimate list was
    /// padded with the largest remaining grid points.
    pub degraded: bool,
}

/// Evaluates `1 / ||Q_noise^H a_co(theta)||^2` on the grid and picks the K
/// largest strict local maxima as DoA estimates.
pub fn music_spectrum(
    split: &SubspaceSplit,
    geom: &CoprimeGeometry,
    grid_step_deg: f64,
) -> Result<MusicResult> {
    if !grid_step_deg.is_finite() || grid_step_deg <= 0.0 {
        return Err(Error::Parameter("grid step must be positive".into()));
    }
    let k = split.signal_dim();
    let steps = (180.0 / grid_step_deg).round() as usize;
    let grid_deg: Vec<f64> = (1..=steps).map(|i| -90.0 + i as f64 * grid_step_deg).collect();

    let noise = &split.noise_basis;
    let lp = noise.rows();
    let nn = noise.cols();
    let spectrum: Vec<f64> = grid_deg
        .iter()
        .map(|&theta| {
            let a = geom.coarray_steering(theta);
            let mut denom = 0.0;
            for col in 0..nn {
                let mut z = Complex64::new(0.0, 0.0);
                for row in 0..lp {
                    z += noise[(row, col)].conj() * a[row];
                }
                denom += z.norm_sqr();
            }
            1.0 / denom.max(f64::MIN_POSITIVE)
        })
        .collect();

    // strict local maxima, largest K
    let mut peaks: Vec<usize> = (1..spectrum.len().saturating_sub(1))
        .filter(|&i| spectrum[i] > spectrum[i - 1] && spectrum[i] > spectrum[i + 1])
        .collect();
    peaks.sort_by(|&a, &b| spectrum[b].partial_cmp(&spectrum[a]).unwrap());
    let mut chosen: Vec<usize> = peaks.iter().copied().take(k).collect();
    let degraded = chosen.len() < k;
    if degraded {
        // pad with the globally largest remaining grid points
        let mut rest: Vec<usize> = (0..spectrum.len())
            .filter(|i| !chosen.contains(i))
            .collect();
        rest.sort_by(|&a, &b| spectrum[b].partial_cmp(&spectrum[a]).unwrap());
        chosen.extend(rest.into_iter().take(k - chosen.len()));
    }
    let mut estimates_deg: Vec<f64> = chosen.iter().map(|&i| grid_deg[i]).collect();
    estimates_deg.sort_by(|a, b| a.partial_cmp(b).unwrap());

    Ok(MusicResult {
        grid_deg,
        spectrum,
        estimates_deg,
        degraded,
    })
}

/// Per-source squared errors in deg^2 after sorting both lists ascending
/// and matching by index.
pub fn match_doas(estimates_deg: &[f64], truth_deg: &[f64]) -> Result<Vec<f64>> {
    if estimates_deg.len() != truth_deg.len() {
        return Err(Error::Dimension(format!(
            "{} estimates vs {} true DoAs",
            estimates_deg.len(),
            truth_deg.len()
        )));
    }
    let mut est = estimates_deg.to_vec();
    let mut tru = truth_deg.to_vec();
    est.sort_by(|a, b| a.partial_cmp(b).unwrap());
    tru.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(est
        .iter()
        .zip(&tru)
        .map(|(e, t)| (e - t) * (e - t))
        .collect())
}

/// Writes the spectrum as CSV with columns `angle_deg,pseudospectrum`.
pub fn write_spectrum_csv<W: std::io::Write>(result: &MusicResult, mut w: W) -> Result<()> {
    writeln!(w, "angle_deg,pseudospectrum")?;
    for (theta, p) in result.grid_deg.iter().zip(&result.spectrum) {
        writeln!(w, "{theta:.6},{p:.12e}")?;
    }
    Ok(())
}
