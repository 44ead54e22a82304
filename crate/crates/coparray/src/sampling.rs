//! Autocorrelation sampling: map an `L x L` physical covariance to the
//! coarray lag vector (selection or averaging variants) and assemble the
//! augmented Toeplitz matrix.
//!
//! The sampling matrices `E_sel` / `E_avg` are never materialized; sampling
//! works off the geometry's per-lag index lists, which is the same linear
//! map with `O(L^2)` memory. The explicit matrix form lives only in tests.

use num_complex::Complex64;

use crate::array::CoprimeGeometry;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Which representative(s) of each lag the sampler uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingKind {
    /// One deterministic representative per lag (smallest flat vec-index).
    Selection,
    /// Arithmetic mean over all vec-indices carrying the lag.
    Averaging,
}

/// Coarray autocorrelation vector over lags `1 - L' ..= L' - 1`.
#[derive(Debug, Clone)]
pub struct CoarrayVector {
    values: Vec<Complex64>,
    kind: SamplingKind,
    half_len: usize,
}

impl CoarrayVector {
    pub fn from_values(values: Vec<Complex64>, kind: SamplingKind) -> Result<Self> {
        if values.len() % 2 != 1 {
            return Err(Error::Dimension(format!(
                "coarray vector length must be odd (2L' - 1), got {}",
                values.len()
            )));
        }
        let half_len = values.len().div_ceil(2);
        Ok(Self { values, kind, half_len })
    }

    pub fn kind(&self) -> SamplingKind {
        self.kind
    }

    /// `L'`, so lags run over `1 - L' ..= L' - 1`.
    pub fn half_len(&self) -> usize {
        self.half_len
    }

    pub fn value_at_lag(&self, lag: i64) -> Complex64 {
        let lp = self.half_len as i64;
        assert!(lag > -lp && lag < lp, "lag {lag} outside segment");
        self.values[(lag + lp - 1) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

fn check_phys_dims(geom: &CoprimeGeometry, r: &ComplexMatrix) -> Result<()> {
    let l = geom.num_elements();
    if r.rows() != l || r.cols() != l {
        return Err(Error::Dimension(format!(
            "covariance is {}x{}, expected {l}x{l}",
            r.rows(),
            r.cols()
        )));
    }
    Ok(())
}

/// vec(R) under column-major vectorization: flat index `j = col * L + row`.
fn vec_entry(r: &ComplexMatrix, j: usize) -> Complex64 {
    let l = r.rows();
    r[(j % l, j / l)]
}

/// Selection sampling: value at lag `n` is `vec(R)` at the smallest flat
/// index carrying that lag.
pub fn sample_selection(geom: &CoprimeGeometry, r: &ComplexMatrix) -> Result<CoarrayVector> {
    check_phys_dims(geom, r)?;
    let values = geom
        .uniform_lags()
        .map(|lag| vec_entry(r, geom.lag_indices(lag).unwrap()[0]))
        .collect();
    CoarrayVector::from_values(values, SamplingKind::Selection)
}

/// Averaging sampling: value at lag `n` is the mean of `vec(R)` over all
/// flat indices carrying that lag.
pub fn sample_averaging(geom: &CoprimeGeometry, r: &ComplexMatrix) -> Result<CoarrayVector> {
    check_phys_dims(geom, r)?;
    let values = geom
        .uniform_lags()
        .map(|lag| {
            let set = geom.lag_indices(lag).unwrap();
            set.iter().map(|&j| vec_entry(r, j)).sum::<Complex64>() / set.len() as f64
        })
        .collect();
    CoarrayVector::from_values(values, SamplingKind::Averaging)
}

pub fn sample(geom: &CoprimeGeometry, r: &ComplexMatrix, kind: SamplingKind) -> Result<CoarrayVector> {
    match kind {
        SamplingKind::Selection => sample_selection(geom, r),
        SamplingKind::Averaging => sample_averaging(geom, r),
    }
}

/// Augmented Toeplitz matrix: entry `(m, n)` carries the lag `m - n` value.
pub fn augmented_matrix(v: &CoarrayVector) -> ComplexMatrix {
    let lp = v.half_len();
    ComplexMatrix::from_fn(lp, lp, |m, n| v.value_at_lag(m as i64 - n as i64))
}
