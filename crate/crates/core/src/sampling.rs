//! Keyed, counter-based Gaussian sampling.
//!
//! Every variate is addressed by `(seed, index, position)`:
//!
//! * `seed` keys a ChaCha8 generator (the `u64` in little-endian order in the
//!   first 8 key bytes, remaining key bytes zero),
//! * `index` selects the ChaCha stream (nonce),
//! * `position` selects the 64-bit word pair inside that stream.
//!
//! Matrix entry `(i, j)` of an `m × n` realization uses position `i·n + j`.
//! A position is turned into a uniform on `(0, 1)` from the top 53 bits of the
//! word pair, and into a standard normal by the inverse CDF
//! `Φ⁻¹(u) = −√2 · erfc⁻¹(2u)`. Because nothing depends on draw order, results
//! are bit-identical for any number of worker threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use statrs::function::erf::erfc_inv;

use crate::matrix::Matrix;
use crate::profiles::VarianceProfile;

/// Address of one independent stream: experiment seed plus sample number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SampleKey {
    pub seed: u64,
    pub index: u64,
}

impl SampleKey {
    pub const fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }
}

/// A realization `G = (a_ij g_ij)`.
pub type MatrixRealization = Matrix;

/// Sequential reader over one keyed stream, seekable by position.
pub struct KeyedStream {
    rng: ChaCha8Rng,
    pos: u64,
}

impl KeyedStream {
    pub fn new(key: SampleKey) -> Self {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&key.seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(key.index);
        Self { rng, pos: 0 }
    }

    /// Moves to `position` (in 64-bit units).
    pub fn seek(&mut self, position: u64) {
        if position != self.pos {
            self.rng.set_word_pos(2 * u128::from(position));
            self.pos = position;
        }
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        self.pos += 1;
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.next_uniform())
    }
}

/// `Φ⁻¹(u)` for `u ∈ (0, 1)`.
#[inline]
pub fn inverse_normal_cdf(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// Standard normal at an explicit position of a keyed stream.
pub fn normal_at(key: SampleKey, position: u64) -> f64 {
    let mut s = KeyedStream::new(key);
    s.seek(position);
    s.next_normal()
}

/// Draws `G = (a_ij g_ij)`. Cells with `a_ij = 0` are skipped and stay exactly zero.
pub fn sample_matrix(profile: &VarianceProfile, key: SampleKey) -> MatrixRealization {
    let (m, n) = (profile.m(), profile.n());
    let mut g = Matrix::zeros(m, n);
    if profile.is_zero() {
        return g;
    }
    let mut stream = KeyedStream::new(key);
    for i in 0..m {
        for j in 0..n {
            let a = profile.get(i, j);
            if a != 0.0 {
                stream.seek((i * n + j) as u64);
                g.set(i, j, a * stream.next_normal());
            }
        }
    }
    g
}

/// `X = (a_j g_j)_j`, coordinate `j` at position `j`.
pub fn sample_weighted_vector(a: &[f64], key: SampleKey) -> Vec<f64> {
    let mut stream = KeyedStream::new(key);
    a.iter()
        .enumerate()
        .map(|(j, &w)| {
            if w == 0.0 {
                0.0
            } else {
                stream.seek(j as u64);
                w * stream.next_normal()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::make_iid;
    use libm::erfc;

    fn std_normal_cdf(x: f64) -> f64 {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn zero_profile_gives_zero_matrix() {
        let p = make_iid(3, 4, 0.0).unwrap();
        assert!(sample_matrix(&p, SampleKey::new(9, 9)).is_zero());
        assert_eq!(sample_weighted_vector(&[0.0; 5], SampleKey::new(1, 2)), vec![0.0; 5]);
    }

    #[test]
    fn deterministic_per_key() {
        let p = make_iid(5, 7, 1.3).unwrap();
        let k = SampleKey::new(42, 17);
        assert_eq!(sample_matrix(&p, k), sample_matrix(&p, k));
        assert_ne!(sample_matrix(&p, k), sample_matrix(&p, SampleKey::new(42, 18)));
        assert_ne!(sample_matrix(&p, k), sample_matrix(&p, SampleKey::new(43, 17)));
    }

    #[test]
    fn entry_depends_only_on_position() {
        // zeroing other cells must not move the draw at (1, 2)
        let full = make_iid(3, 4, 1.0).unwrap();
        let mut sparse = Matrix::zeros(3, 4);
        sparse.set(1, 2, 1.0);
        let sparse = VarianceProfile::new(sparse).unwrap();
        let k = SampleKey::new(5, 3);
        let a = sample_matrix(&full, k);
        let b = sample_matrix(&sparse, k);
        assert_eq!(a.get(1, 2), b.get(1, 2));
        assert_eq!(a.get(1, 2), normal_at(k, 6));
    }

    #[test]
    fn signed_weights_flip_signs_only() {
        let k = SampleKey::new(3, 0);
        let a = [1.0, -2.0, 0.5, -0.25];
        let abs: Vec<f64> = a.iter().map(|v: &f64| v.abs()).collect();
        let x = sample_weighted_vector(&a, k);
        let y = sample_weighted_vector(&abs, k);
        for (u, v) in x.iter().zip(&y) {
            assert_eq!(u.abs(), v.abs());
        }
    }

    #[test]
    fn entry_variance_iid() {
        let p = make_iid(32, 32, 1.0).unwrap();
        let n = 2000;
        let mut sum = vec![0.0; 32 * 32];
        let mut sumsq = vec![0.0; 32 * 32];
        for idx in 0..n {
            let g = sample_matrix(&p, SampleKey::new(0, idx));
            for (c, v) in g.as_slice().iter().enumerate() {
                sum[c] += v;
                sumsq[c] += v * v;
            }
        }
        // sd of a sample variance is about sqrt(2/(n-1)) ~ 0.032; each cell gets
        // a band of ~4.7 sd (1024 cells at once), the pooled mean a tight one
        let mut pooled = 0.0;
        for c in 0..32 * 32 {
            let mean = sum[c] / n as f64;
            let var = (sumsq[c] - n as f64 * mean * mean) / (n - 1) as f64;
            assert!((0.85..=1.15).contains(&var), "cell {c}: var {var}");
            pooled += var / 1024.0;
        }
        assert!((pooled - 1.0).abs() < 0.005, "pooled variance {pooled}");
    }

    #[test]
    fn mean_abs_matches_gamma_one() {
        let n = 10_000;
        let mean: f64 =
            (0..n).map(|i| sample_weighted_vector(&[1.0], SampleKey::new(11, i))[0].abs()).sum::<f64>() / n as f64;
        assert!((mean - 0.798).abs() < 0.02, "{mean}");
    }

    #[test]
    fn pooled_symmetry_and_normality() {
        let n = 100_000usize;
        let mut s = KeyedStream::new(SampleKey::new(2024, 0));
        let mut xs: Vec<f64> = (0..n).map(|_| s.next_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n as f64;
        let skew = m3 / m2.powf(1.5);
        // std error of sample skewness ~ sqrt(6/n)
        assert!(skew.abs() < 4.0 * (6.0 / n as f64).sqrt(), "skew {skew}");

        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = xs
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let f = std_normal_cdf(x);
                (f - k as f64 / n as f64).abs().max(((k + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS distance {ks}");
    }

    #[test]
    fn inverse_cdf_sanity() {
        assert_eq!(inverse_normal_cdf(0.5), 0.0);
        assert!((inverse_normal_cdf(0.975) - 1.959963984540054).abs() < 1e-12);
        assert!((std_normal_cdf(inverse_normal_cdf(1e-10)) - 1e-10).abs() < 1e-19);
    }
}
