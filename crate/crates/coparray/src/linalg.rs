//! Dense complex linear-algebra kernels: Hermitian eigendecomposition,
//! principal square root, Frobenius norms, and diagonal access.
//!
//! Matrices are stored row-major. Diagonal indexing follows the signed-offset
//! convention: offset `i <= 0` addresses the subdiagonal with entries
//! `A[j - i, j]`, offset `i > 0` the superdiagonal with entries `A[j, j + i]`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from rows of `(re, im)` pairs; panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let nr = rows.len();
        let nc = rows[0].len();
        Self::from_fn(nr, nc, |r, c| {
            assert_eq!(rows[r].len(), nc, "ragged row {r}");
            rows[r][c]
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] + other[(r, c)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - other[(r, c)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * s)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute deviation from Hermitian symmetry.
    pub fn hermitian_asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self[(r, c)] - self[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn hermitian_check(&self, tol: f64) -> bool {
        self.hermitian_asymmetry() <= tol
    }

    /// `(A + A^H) / 2`.
    pub fn symmetrize(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    /// Signed-offset diagonal: offset `i <= 0` yields entries `A[j - i, j]`,
    /// offset `i > 0` yields `A[j, j + i]`, each of length `D - |i|`.
    pub fn get_diagonal(&self, offset: i64) -> Result<Vec<Complex64>> {
        assert!(self.is_square());
        let d = self.rows as i64;
        if offset.abs() >= d {
            return Err(Error::DiagonalRange {
                offset,
                dim: self.rows,
            });
        }
        let len = (d - offset.abs()) as usize;
        let shift = offset.unsigned_abs() as usize;
        let mut out = Vec::with_capacity(len);
        for j in 0..len {
            if offset <= 0 {
                out.push(self[(j + shift, j)]);
            } else {
                out.push(self[(j, j + shift)]);
            }
        }
        Ok(out)
    }

    /// Rebuilds a `dim x dim` matrix from one vector per signed offset, in
    /// offset order `1 - dim ..= dim - 1`.
    pub fn set_all_diagonals(dim: usize, diagonals: &[Vec<Complex64>]) -> Result<Self> {
        if diagonals.len() != 2 * dim - 1 {
            return Err(Error::Dimension(format!(
                "expected {} diagonals, got {}",
                2 * dim - 1,
                diagonals.len()
            )));
        }
        let mut m = Self::zeros(dim, dim);
        for (idx, diag) in diagonals.iter().enumerate() {
            let offset = idx as i64 - (dim as i64 - 1);
            let shift = offset.unsigned_abs() as usize;
            if diag.len() != dim - shift {
                return Err(Error::Dimension(format!(
                    "diagonal at offset {offset} has length {}, expected {}",
                    diag.len(),
                    dim - shift
                )));
            }
            for (j, &v) in diag.iter().enumerate() {
                if offset <= 0 {
                    m[(j + shift, j)] = v;
                } else {
                    m[(j, j + shift)] = v;
                }
            }
        }
        Ok(m)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues sorted
/// descending, column `j` of `vectors` paired with `values[j]`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenPair {
    /// `U diag(values) U^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.values.len();
        let u = &self.vectors;
        ComplexMatrix::from_fn(d, d, |r, c| {
            (0..d)
                .map(|k| u[(r, k)] * self.values[k] * u[(c, k)].conj())
                .sum()
        })
    }

    /// Rebuilds with eigenvalues mapped through `f`, eigenvectors unchanged.
    pub fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let mapped = Self {
            values: self.values.iter().map(|&l| f(l)).collect(),
            vectors: self.vectors.clone(),
        };
        mapped.reconstruct()
    }
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// Relative tolerance on the discarded anti-Hermitian part during input
/// symmetrization; larger asymmetry is rejected as an error.
pub const SYMMETRIZATION_TOL: f64 = 1e-8;

/// Hermitian eigendecomposition via cyclic Jacobi rotations.
///
/// The input is symmetrized as `(A + A^H) / 2` first; asymmetry beyond
/// `1e-8 * ||A||_F` is an error. Eigenvalues are returned sorted descending
/// (stable order on ties).
pub fn herm_evd(a: &ComplexMatrix) -> Result<EigenPair> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "herm_evd requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let norm = a.frob_norm();
    let asym = a.hermitian_asymmetry();
    let tol = SYMMETRIZATION_TOL * norm.max(1e-300);
    if asym > tol {
        return Err(Error::NotHermitian {
            asymmetry: asym,
            tol,
        });
    }
    let mut w = a.symmetrize();
    let d = w.rows();
    let mut u = ComplexMatrix::identity(d);

    if d == 1 {
        return Ok(EigenPair {
            values: vec![w[(0, 0)].re],
            vectors: u,
        });
    }

    let stop = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
    let mut converged = false;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|p| ((p + 1)..d).map(move |q| (p, q)))
            .map(|(p, q)| w[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= stop {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                jacobi_rotate(&mut w, &mut u, p, q);
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let off: f64 = (0..d)
            .flat_map(|p| ((p + 1)..d).map(move |q| (p, q)))
            .map(|(p, q)| w[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() > stop * 1e3 {
            return Err(Error::EvdConvergence {
                sweeps: MAX_JACOBI_SWEEPS,
            });
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let values_raw: Vec<f64> = (0..d).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&i, &j| values_raw[j].partial_cmp(&values_raw[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| values_raw[i]).collect();
    let vectors = ComplexMatrix::from_fn(d, d, |r, c| u[(r, order[c])]);
    Ok(EigenPair { values, vectors })
}

/// One complex Jacobi rotation annihilating `w[p][q]`, accumulated into `u`.
fn jacobi_rotate(w: &mut ComplexMatrix, u: &mut ComplexMatrix, p: usize, q: usize) {
    let beta = w[(p, q)];
    let b = beta.norm();
    if b == 0.0 {
        return;
    }
    let alpha = w[(p, p)].re;
    let gamma = w[(q, q)].re;
    // Phase e^{i phi} of the off-diagonal entry, then a real rotation angle.
    let phase = beta / b;
    let theta = 0.5 * (-2.0 * b).atan2(alpha - gamma);
    let (s, c) = theta.sin_cos();
    let d = w.rows();

    // Unitary 2x2 block: column p = (c*phase, -s), column q = (s*phase, c).
    let upp = phase * c;
    let uqp = Complex64::new(-s, 0.0);
    let upq = phase * s;
    let uqq = Complex64::new(c, 0.0);

    for i in 0..d {
        let wip = w[(i, p)];
        let wiq = w[(i, q)];
        w[(i, p)] = wip * upp + wiq * uqp;
        w[(i, q)] = wip * upq + wiq * uqq;
    }
    for i in 0..d {
        let wpi = w[(p, i)];
        let wqi = w[(q, i)];
        w[(p, i)] = upp.conj() * wpi + uqp.conj() * wqi;
        w[(q, i)] = upq.conj() * wpi + uqq.conj() * wqi;
    }
    // keep the diagonal exactly real and the pivot exactly zero
    w[(p, p)] = Complex64::new(w[(p, p)].re, 0.0);
    w[(q, q)] = Complex64::new(w[(q, q)].re, 0.0);
    w[(p, q)] = Complex64::new(0.0, 0.0);
    w[(q, p)] = Complex64::new(0.0, 0.0);

    for i in 0..d {
        let uip = u[(i, p)];
        let uiq = u[(i, q)];
        u[(i, p)] = uip * upp + uiq * uqp;
        u[(i, q)] = uip * upq + uiq * uqq;
    }
}

/// Clamp tolerance for tiny negative eigenvalues in [`principal_sqrt`].
pub fn psd_clip_tol(norm: f64) -> f64 {
    1e-10 * norm.max(1.0)
}

/// Principal square root of a PSD Hermitian matrix: `U diag(sqrt(lambda)) U^H`.
///
/// Eigenvalues in `[-clip, 0)` with `clip = 1e-10 * max(1, ||A||_F)` are
/// clamped to zero; anything more negative is an error.
pub fn principal_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let pair = herm_evd(a)?;
    let clip = psd_clip_tol(a.frob_norm());
    if let Some(&lmin) = pair.values.last() {
        if lmin < -clip {
            return Err(Error::NotPsd {
                eigenvalue: lmin,
                tol: clip,
            });
        }
    }
    Ok(pair.map_values(|l| l.max(0.0).sqrt()))
}

/// Squared Frobenius norm, `sum |a_ij|^2`.
pub fn frob_norm_sq(a: &ComplexMatrix) -> f64 {
    a.frob_norm_sq()
}
