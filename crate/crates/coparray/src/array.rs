//! Coprime array geometry, steering vectors, difference coarray, and
//! nominal (ground-truth) covariance construction.
//!
//! Element locations are integers in units of the reference spacing
//! `d = lambda / 2`, so the phasor base is `v(theta) = exp(-i pi sin theta)`
//! and the steering entry for an element at location `p` is `v(theta)^p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Coprime pair geometry with difference-coarray index machinery.
///
/// The physical array has `L = 2M + N - 1` elements at
/// `sort({(i-1)M}_{i=1..N} U {iN}_{i=1..2M-1})`. The uniform coarray
/// segment spans lags `1 - L' ..= L' - 1` with `L' = MN + M`.
#[derive(Debug, Clone)]
pub struct CoprimeGeometry {
    m: u32,
    n: u32,
    locations: Vec<i64>,
    l_prime: usize,
    diff_set: Vec<i64>,
    /// For each lag `n` in the uniform segment, the flat indices `j` of
    /// `vec(R)` (column-major, `j = col * L + row`) with
    /// `p[row] - p[col] = n`, stored at slot `n + L' - 1`.
    lag_index_sets: Vec<Vec<usize>>,
}

impl CoprimeGeometry {
    pub fn build(m: u32, n: u32) -> Result<Self> {
        if m < 1 || m >= n {
            return Err(Error::Validation(format!(
                "coprime pair requires 1 <= M < N, got ({m}, {n})"
            )));
        }
        if gcd(m as u64, n as u64) != 1 {
            return Err(Error::Validation(format!("({m}, {n}) are not coprime")));
        }
        let mut locations: Vec<i64> = (1..=n as i64)
            .map(|i| (i - 1) * m as i64)
            .chain((1..=(2 * m as i64 - 1)).map(|i| i * n as i64))
            .collect();
        locations.sort_unstable();
        locations.dedup();
        let l = locations.len();
        debug_assert_eq!(l, (2 * m + n - 1) as usize);

        let l_prime = (m * n + m) as usize;
        let mut diff_set: Vec<i64> = locations
            .iter()
            .flat_map(|&a| locations.iter().map(move |&b| a - b))
            .collect();
        diff_set.sort_unstable();
        diff_set.dedup();

        let mut lag_index_sets = vec![Vec::new(); 2 * l_prime - 1];
        for col in 0..l {
            for row in 0..l {
                let lag = locations[row] - locations[col];
                if (lag.unsigned_abs() as usize) < l_prime {
                    let slot = (lag + l_prime as i64 - 1) as usize;
                    lag_index_sets[slot].push(col * l + row);
                }
            }
        }
        for set in &mut lag_index_sets {
            set.sort_unstable();
            debug_assert!(!set.is_empty(), "uniform segment must be hole-free");
        }

        Ok(Self {
            m,
            n,
            locations,
            l_prime,
            diff_set,
            lag_index_sets,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Element locations in units of `d`, sorted ascending.
    pub fn locations(&self) -> &[i64] {
        &self.locations
    }

    /// Physical element count `L`.
    pub fn num_elements(&self) -> usize {
        self.locations.len()
    }

    /// Uniform-coarray half-length `L' = MN + M`.
    pub fn coarray_len(&self) -> usize {
        self.l_prime
    }

    /// All pairwise location differences, sorted.
    pub fn diff_set(&self) -> &[i64] {
        &self.diff_set
    }

    /// Lags of the uniform coarray segment, `1 - L' ..= L' - 1`.
    pub fn uniform_lags(&self) -> impl Iterator<Item = i64> + '_ {
        let lp = self.l_prime as i64;
        (1 - lp)..lp
    }

    /// Flat vec-indices carrying lag `n`; `None` outside the uniform segment.
    pub fn lag_indices(&self, lag: i64) -> Option<&[usize]> {
        let lp = self.l_prime as i64;
        if lag <= -lp || lag >= lp {
            return None;
        }
        Some(&self.lag_index_sets[(lag + lp - 1) as usize])
    }

    /// Physical-array steering vector, entry `i = v(theta)^{p_i}`.
    pub fn steering_vector(&self, theta_deg: f64) -> Vec<Complex64> {
        let s = theta_deg.to_radians().sin();
        self.locations
            .iter()
            .map(|&p| Complex64::from_polar(1.0, -std::f64::consts::PI * s * p as f64))
            .collect()
    }

    /// Coarray steering vector, entry `m = v(theta)^m` for `m = 0..L'-1`.
    pub fn coarray_steering(&self, theta_deg: f64) -> Vec<Complex64> {
        let s = theta_deg.to_radians().sin();
        (0..self.l_prime)
            .map(|m| Complex64::from_polar(1.0, -std::f64::consts::PI * s * m as f64))
            .collect()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Source/noise scenario: DoAs in degrees, linear source powers, noise
/// variance, snapshot count, and the RNG seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub thetas_deg: Vec<f64>,
    pub powers: Vec<f64>,
    pub noise_var: f64,
    pub snapshots: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn num_sources(&self) -> usize {
        self.thetas_deg.len()
    }

    pub fn validate(&self, geom: &CoprimeGeometry) -> Result<()> {
        if self.thetas_deg.len() != self.powers.len() {
            return Err(Error::Validation(format!(
                "{} DoAs but {} source powers",
                self.thetas_deg.len(),
                self.powers.len()
            )));
        }
        if self.num_sources() >= geom.coarray_len() {
            return Err(Error::Validation(format!(
                "K = {} sources exceeds the identifiability bound K < {}",
                self.num_sources(),
                geom.coarray_len()
            )));
        }
        for &t in &self.thetas_deg {
            if !(-90.0 < t && t <= 90.0) {
                return Err(Error::Validation(format!(
                    "DoA {t} deg outside (-90, 90]"
                )));
            }
        }
        if self.powers.iter().any(|&p| p <= 0.0) {
            return Err(Error::Validation("source powers must be positive".into()));
        }
        if self.noise_var < 0.0 {
            return Err(Error::Validation("noise variance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Nominal physical-array covariance `S diag(d) S^H + sigma^2 I_L`.
pub fn nominal_phys_cov(geom: &CoprimeGeometry, scenario: &Scenario) -> ComplexMatrix {
    let l = geom.num_elements();
    let steerings: Vec<Vec<Complex64>> = scenario
        .thetas_deg
        .iter()
        .map(|&t| geom.steering_vector(t))
        .collect();
    rank_k_plus_noise(l, &steerings, &scenario.powers, scenario.noise_var)
}

/// Nominal coarray covariance `S_co diag(d) S_co^H + sigma^2 I_{L'}` (Toeplitz).
pub fn nominal_coarray_cov(geom: &CoprimeGeometry, scenario: &Scenario) -> ComplexMatrix {
    let lp = geom.coarray_len();
    let steerings: Vec<Vec<Complex64>> = scenario
        .thetas_deg
        .iter()
        .map(|&t| geom.coarray_steering(t))
        .collect();
    rank_k_plus_noise(lp, &steerings, &scenario.powers, scenario.noise_var)
}

fn rank_k_plus_noise(
    dim: usize,
    steerings: &[Vec<Complex64>],
    powers: &[f64],
    noise_var: f64,
) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |r, c| {
        let mut z: Complex64 = steerings
            .iter()
            .zip(powers)
            .map(|(s, &d)| s[r] * s[c].conj() * d)
            .sum();
        if r == c {
            z += noise_var;
        }
        z
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::herm_evd;
    use approx::assert_abs_diff_eq;

    #[test]
    fn geometry_2_3() {
        let g = CoprimeGeometry::build(2, 3).unwrap();
        assert_eq!(g.locations(), &[0, 2, 3, 4, 6, 9]);
        assert_eq!(g.num_elements(), 6);
        assert_eq!(g.coarray_len(), 8);
    }

    #[test]
    fn geometry_3_5_and_1_2() {
        let g = CoprimeGeometry::build(3, 5).unwrap();
        assert_eq!(g.num_elements(), 10);
        assert_eq!(g.coarray_len(), 18);

        let g = CoprimeGeometry::build(1, 2).unwrap();
        assert_eq!(g.locations(), &[0, 1, 2]);
        assert_eq!(g.coarray_len(), 3);
    }

    #[test]
    fn geometry_rejects_invalid_pairs() {
        assert!(CoprimeGeometry::build(2, 4).is_err());
        assert!(CoprimeGeometry::build(3, 3).is_err());
        assert!(CoprimeGeometry::build(5, 3).is_err());
        assert!(CoprimeGeometry::build(0, 3).is_err());
    }

    #[test]
    fn uniform_segment_hole_free_up_to_20() {
        for m in 1..10u32 {
            for n in (m + 1)..(20 - m) {
                if super::gcd(m as u64, n as u64) != 1 {
                    continue;
                }
                let g = CoprimeGeometry::build(m, n).unwrap();
                let lp = g.coarray_len() as i64;
                let in_segment = g
                    .diff_set()
                    .iter()
                    .filter(|&&d| d > -lp && d < lp)
                    .count();
                assert_eq!(
                    in_segment,
                    (2 * lp - 1) as usize,
                    "holes in uniform segment for ({m},{n})"
                );
                for lag in g.uniform_lags() {
                    assert!(!g.lag_indices(lag).unwrap().is_empty());
                }
            }
        }
    }

    #[test]
    fn lag_sets_partition_segment_indices() {
        let g = CoprimeGeometry::build(2, 3).unwrap();
        let l = g.num_elements();
        let lp = g.coarray_len() as i64;
        let mut seen = std::collections::HashSet::new();
        for lag in g.uniform_lags() {
            for &j in g.lag_indices(lag).unwrap() {
                assert!(seen.insert(j), "index {j} in two lag sets");
                let (col, row) = (j / l, j % l);
                assert_eq!(g.locations()[row] - g.locations()[col], lag);
            }
        }
        for col in 0..l {
            for row in 0..l {
                let lag = g.locations()[row] - g.locations()[col];
                let member = seen.contains(&(col * l + row));
                assert_eq!(member, lag > -lp && lag < lp);
            }
        }
    }

    #[test]
    fn steering_examples() {
        let g = CoprimeGeometry::build(1, 2).unwrap();
        for z in g.steering_vector(0.0) {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        // theta = 90: v = exp(-i pi), locations {0,1,2} -> (1, -1, 1)
        let s = g.steering_vector(90.0);
        assert!((s[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((s[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((s[2] - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let g = CoprimeGeometry::build(3, 5).unwrap();
        for theta in [-72.5, -10.0, 0.0, 33.3, 90.0] {
            for z in g.steering_vector(theta) {
                assert_abs_diff_eq!(z.norm(), 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn coarray_steering_examples() {
        let g = CoprimeGeometry::build(2, 3).unwrap();
        for z in g.coarray_steering(0.0) {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        for theta in [-45.0, 12.0, 88.0] {
            let a = g.coarray_steering(theta);
            assert!((a[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        // theta = 30: sin = 1/2, entry m = exp(-i pi (m) / 2) for m = 0..
        let a = g.coarray_steering(30.0);
        for (m, z) in a.iter().enumerate() {
            let expect = Complex64::from_polar(1.0, -std::f64::consts::PI * m as f64 / 2.0);
            assert!((z - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn kronecker_lag_consistency() {
        // a(theta) = conj(s) (x) s has a(theta)[j] = v^lag(j) on the segment
        let g = CoprimeGeometry::build(2, 3).unwrap();
        let l = g.num_elements();
        for i in 0..10 {
            let theta = -85.0 + 17.0 * i as f64;
            let s = g.steering_vector(theta);
            let sin_t = theta.to_radians().sin();
            for lag in g.uniform_lags() {
                let v_n =
                    Complex64::from_polar(1.0, -std::f64::consts::PI * sin_t * lag as f64);
                for &j in g.lag_indices(lag).unwrap() {
                    let (col, row) = (j / l, j % l);
                    let a_j = s[col].conj() * s[row];
                    assert!((a_j - v_n).norm() < 1e-12);
                }
            }
        }
    }

    fn test_scenario() -> Scenario {
        Scenario {
            thetas_deg: vec![-20.0, 35.0],
            powers: vec![1.0, 2.0],
            noise_var: 0.5,
            snapshots: 100,
            seed: 1,
        }
    }

    #[test]
    fn phys_cov_noise_only_and_trace() {
        let g = CoprimeGeometry::build(2, 3).unwrap();
        let noise_only = Scenario {
            thetas_deg: vec![],
            powers: vec![],
            noise_var: 0.7,
            snapshots: 1,
            seed: 0,
        };
        let r = nominal_phys_cov(&g, &noise_only);
        let expect = ComplexMatrix::identity(6).scale(0.7);
        assert!(r.sub(&expect).frob_norm() < 1e-14);

        let s = test_scenario();
        let r = nominal_phys_cov(&g, &s);
        let l = g.num_elements() as f64;
        let trace_expect = (1.0 + 2.0) * l + 0.5 * l;
        assert_abs_diff_eq!(r.trace().re, trace_expect, epsilon = 1e-10);
        assert!(r.hermitian_check(1e-12));
    }

    #[test]
    fn phys_cov_single_source_all_ones() {
        let g = CoprimeGeometry::build(2, 3).unwrap();
        let s = Scenario {
            thetas_deg: vec![0.0],
            powers: vec![1.0],
            noise_var: 0.0,
            snapshots: 1,
            seed: 0,
        };
        let r = nominal_phys_cov(&g, &s);
        for rr in 0..6 {
            for cc in 0..6 {
                assert!((r[(rr, cc)] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn coarray_cov_structure() {
        let g = CoprimeGeometry::build(2, 3).unwrap();
        let s = test_scenario();
        let r = nominal_coarray_cov(&g, &s);
        let lp = g.coarray_len();
        // Toeplitz: entry depends only on m - n
        for m in 0..lp {
            for n in 0..lp {
                if m + 1 < lp && n + 1 < lp {
                    assert!((r[(m, n)] - r[(m + 1, n + 1)]).norm() < 1e-13);
                }
            }
        }
        // noise-subspace eigenvalues all equal sigma^2
        let pair = herm_evd(&r).unwrap();
        for &lam in &pair.values[s.num_sources()..] {
            assert_abs_diff_eq!(lam, s.noise_var, epsilon = 1e-10);
        }
    }

    #[test]
    fn scenario_validation() {
        let g = CoprimeGeometry::build(1, 2).unwrap();
        let mut s = test_scenario();
        assert!(s.validate(&g).is_ok());
        s.thetas_deg = vec![0.0; 3]; // K = 3 >= L' = 3
        s.powers = vec![1.0; 3];
        assert!(s.validate(&g).is_err());
        let mut s = test_scenario();
        s.thetas_deg[0] = -90.0;
        assert!(s.validate(&g).is_err());
        let mut s = test_scenario();
        s.powers[0] = 0.0;
        assert!(s.validate(&g).is_err());
    }
}
