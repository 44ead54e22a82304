//! Property tests for the algebraic invariants the estimators rely on.

use coparray::estimators::{eigen_correct, nearest_psd, nearest_toeplitz};
use coparray::linalg::{frob_norm_sq, herm_evd, ComplexMatrix};
use coparray::music::match_doas;
use coparray::sampling::{augmented_matrix, CoarrayVector, SamplingKind};
use num_complex::Complex64;
use proptest::prelude::*;

fn hermitian_strategy(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (2..=max_dim).prop_flat_map(|d| {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |raw| {
            let mut a = ComplexMatrix::zeros(d, d);
            for r in 0..d {
                let (re, _) = raw[r * d + r];
                a[(r, r)] = Complex64::new(re, 0.0);
                for c in (r + 1)..d {
                    let (re, im) = raw[r * d + c];
                    a[(r, c)] = Complex64::new(re, im);
                    a[(c, r)] = Complex64::new(re, -im);
                }
            }
            a
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evd_reconstructs_and_sorts(a in hermitian_strategy(12)) {
        let pair = herm_evd(&a).unwrap();
        let rel = pair.reconstruct().sub(&a).frob_norm() / a.frob_norm().max(1e-12);
        prop_assert!(rel <= 1e-10);
        for w in pair.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        let lam_sq: f64 = pair.values.iter().map(|l| l * l).sum();
        prop_assert!((frob_norm_sq(&a) - lam_sq).abs() <= 1e-10 * frob_norm_sq(&a).max(1e-12));
    }

    #[test]
    fn projections_contract_and_idempotent(a in hermitian_strategy(10)) {
        let t = nearest_toeplitz(&a);
        prop_assert!(t.frob_norm_sq() <= a.frob_norm_sq() + 1e-10);
        prop_assert!(nearest_toeplitz(&t).sub(&t).frob_norm() <= 1e-10);

        let p = nearest_psd(&a).unwrap();
        prop_assert!(p.frob_norm_sq() <= a.frob_norm_sq() + 1e-10);
        prop_assert!(nearest_psd(&p).unwrap().sub(&p).frob_norm() <= 1e-10);
        let pair = herm_evd(&p).unwrap();
        prop_assert!(*pair.values.last().unwrap() >= -1e-10);

        let k = a.rows() / 2;
        if k >= 1 {
            let o = eigen_correct(&a, k).unwrap();
            prop_assert!(o.frob_norm_sq() <= a.frob_norm_sq() + 1e-10);
            prop_assert!(eigen_correct(&o, k).unwrap().sub(&o).frob_norm() <= 1e-9);
        }
    }

    #[test]
    fn hermitian_diagonals_mirror(a in hermitian_strategy(9)) {
        let d = a.rows() as i64;
        for off in 1..d {
            let pos = a.get_diagonal(off).unwrap();
            let neg = a.get_diagonal(-off).unwrap();
            for (x, y) in pos.iter().zip(&neg) {
                prop_assert!((x - y.conj()).norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn augmented_matrix_lags_and_toeplitz(
        raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5..=25)
    ) {
        let mut values: Vec<Complex64> =
            raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        if values.len().is_multiple_of(2) {
            values.pop();
        }
        let v = CoarrayVector::from_values(values.clone(), SamplingKind::Selection).unwrap();
        let t = augmented_matrix(&v);
        let lp = v.half_len();
        for m in 0..lp {
            for n in 0..lp {
                prop_assert_eq!(t[(m, n)], values[(m as i64 - n as i64 + lp as i64 - 1) as usize]);
            }
        }
    }

    #[test]
    fn doa_matching_is_permutation_invariant(
        mut truth in proptest::collection::vec(-89.0f64..90.0, 1..8),
        shift in proptest::collection::vec(-3.0f64..3.0, 8)
    ) {
        let estimates: Vec<f64> = truth
            .iter()
            .zip(&shift)
            .map(|(t, s)| (t + s).clamp(-89.9, 90.0))
            .collect();
        let forward = match_doas(&estimates, &truth).unwrap();
        let mut reversed_est = estimates.clone();
        reversed_est.reverse();
        truth.reverse();
        let backward = match_doas(&reversed_est, &truth).unwrap();
        prop_assert_eq!(forward, backward);
    }
}
