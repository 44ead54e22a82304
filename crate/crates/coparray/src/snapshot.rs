//! Seeded generation of received-signal snapshots and the sample covariance.
//!
//! Snapshots follow `y_q = sum_k s(theta_k) x_{q,k} + n_q` with
//! `x_{q,k} ~ CN(0, d_k)` and `n_q ~ CN(0, sigma^2 I)`, independent across
//! snapshots and sources. The generator is ChaCha8 keyed by the scenario
//! seed, so the same seed reproduces the snapshot matrix bit-for-bit.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::array::{CoprimeGeometry, Scenario};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// A batch of snapshots: `L x Q` matrix with snapshot `q` in column `q`.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub snapshots: ComplexMatrix,
    pub seed: u64,
}

impl SnapshotSet {
    pub fn num_snapshots(&self) -> usize {
        self.snapshots.cols()
    }

    pub fn num_elements(&self) -> usize {
        self.snapshots.rows()
    }
}

/// Draws one `CN(0, power)` sample: two independent standard normals scaled
/// by `sqrt(power / 2)`.
fn complex_gaussian(rng: &mut impl Rng, power: f64) -> Complex64 {
    let scale = (power / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Simulates `Q` snapshots of the scenario on the given geometry.
pub fn simulate_snapshots(geom: &CoprimeGeometry, scenario: &Scenario) -> Result<SnapshotSet> {
    scenario.validate(geom)?;
    let l = geom.num_elements();
    let q = scenario.snapshots;
    let steerings: Vec<Vec<Complex64>> = scenario
        .thetas_deg
        .iter()
        .map(|&t| geom.steering_vector(t))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut y = ComplexMatrix::zeros(l, q.max(1));
    for qi in 0..q {
        for (ki, steer) in steerings.iter().enumerate() {
            let x = complex_gaussian(&mut rng, scenario.powers[ki]);
            for li in 0..l {
                y[(li, qi)] += steer[li] * x;
            }
        }
        if scenario.noise_var > 0.0 {
            for li in 0..l {
                y[(li, qi)] += complex_gaussian(&mut rng, scenario.noise_var);
            }
        }
    }
    Ok(SnapshotSet {
        snapshots: y,
        seed: scenario.seed,
    })
}

/// Sample covariance `(1/Q) sum_q y_q y_q^H`.
pub fn sample_covariance(set: &SnapshotSet) -> Result<ComplexMatrix> {
    let q = set.num_snapshots();
    if q == 0 {
        return Err(Error::Parameter("empty snapshot set".into()));
    }
    let l = set.num_elements();
    let y = &set.snapshots;
    let mut r = ComplexMatrix::zeros(l, l);
    for qi in 0..q {
        for row in 0..l {
            let yr = y[(row, qi)];
            for col in 0..l {
                r[(row, col)] += yr * y[(col, qi)].conj();
            }
        }
    }
    Ok(r.scale(1.0 / q as f64))
}

/// Derives the per-realization seed for Monte Carlo trial streams.
///
/// SplitMix64 finalizer over the master seed xored with the cell and trial
/// indices, so distinct trials get decorrelated, individually reproducible
/// streams.
pub fn derive_trial_seed(master_seed: u64, snr_index: usize, q_index: usize, trial: usize) -> u64 {
    let mut z = master_seed
        ^ (snr_index as u64).wrapping_mul(0x9E3779B97F4A7C15)
        ^ (q_index as u64).wrapping_mul(0xBF58476D1CE4E5B9)
        ^ (trial as u64).wrapping_mul(0x94D049BB133111EB);
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Writes snapshots in the documented little-endian binary layout:
/// header `{L: u32, Q: u32, seed: u64}`, then interleaved re/im f64 pairs,
/// column-major (snapshot by snapshot).
pub fn write_snapshots<W: Write>(set: &SnapshotSet, mut w: W) -> Result<()> {
    let l = set.num_elements();
    let q = set.num_snapshots();
    w.write_all(&(l as u32).to_le_bytes())?;
    w.write_all(&(q as u32).to_le_bytes())?;
    w.write_all(&set.seed.to_le_bytes())?;
    for qi in 0..q {
        for li in 0..l {
            let z = set.snapshots[(li, qi)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads snapshots written by [`write_snapshots`].
pub fn read_snapshots<R: Read>(mut r: R) -> Result<SnapshotSet> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let l = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let q = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let seed = u64::from_le_bytes(b8);
    let mut y = ComplexMatrix::zeros(l.max(1), q.max(1));
    for qi in 0..q {
        for li in 0..l {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            y[(li, qi)] = Complex64::new(re, im);
        }
    }
    Ok(SnapshotSet { snapshots: y, seed })
}
