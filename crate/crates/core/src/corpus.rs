//! Pinned, seed-generated input corpora for the diagnostics and acceptance runs.
//!
//! Corpus draws use stream indices at the top of the `u64` range so they
//! never share a stream with Monte Carlo samples of the same seed.

use crate::matrix::Matrix;
use crate::profiles::{NormPair, VarianceProfile};
use crate::sampling::{KeyedStream, SampleKey};

const COMPARATOR_TAG: u64 = 0xC0A0_0000_0000_0000;
const SIGMA_TAG: u64 = 0xC0A1_0000_0000_0000;
const MATRIX_TAG: u64 = 0xC0A2_0000_0000_0000;
const EMAX_TAG: u64 = 0xC0A3_0000_0000_0000;

fn stream(seed: u64, tag: u64, k: usize) -> KeyedStream {
    KeyedStream::new(SampleKey::new(seed, tag | k as u64))
}

fn uniform_int(s: &mut KeyedStream, lo: usize, hi: usize) -> usize {
    lo + ((s.next_uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo)
}

/// A weight vector of length `len` from one of five decay families.
fn decay_vector(s: &mut KeyedStream, family: usize, len: usize) -> Vec<f64> {
    let scale = (4.0 * s.next_uniform() - 2.0).exp();
    let v: Vec<f64> = match family {
        0 => vec![1.0; len],
        1 => {
            let alpha = 1.5 * s.next_uniform();
            (0..len).map(|k| ((k + 1) as f64).powf(-alpha)).collect()
        }
        2 => {
            let r = 0.5 + 0.5 * s.next_uniform();
            (0..len).map(|k| r.powi(k as i32)).collect()
        }
        3 => (0..len).map(|_| s.next_uniform()).collect(),
        _ => {
            // a few spikes over a small floor
            let mut v: Vec<f64> = (0..len).map(|_| 0.01 * s.next_uniform()).collect();
            for _ in 0..len.min(3) {
                let j = uniform_int(s, 0, len - 1);
                v[j] = 1.0;
            }
            v
        }
    };
    v.into_iter().map(|x| x * scale).collect()
}

/// 200 nonzero weight vectors, lengths 1 to 512 (log-uniform), mixed decay.
pub fn comparator_corpus(seed: u64) -> Vec<Vec<f64>> {
    (0..200)
        .map(|k| {
            let mut s = stream(seed, COMPARATOR_TAG, k);
            let len = (512f64.powf(s.next_uniform()).round() as usize).clamp(1, 512);
            decay_vector(&mut s, k % 5, len)
        })
        .collect()
}

/// 20 short weight vectors for Monte Carlo cross-checks of `E max`.
pub fn emax_corpus(seed: u64) -> Vec<Vec<f64>> {
    (0..20)
        .map(|k| {
            let mut s = stream(seed, EMAX_TAG, k);
            let len = uniform_int(&mut s, 1, 24);
            decay_vector(&mut s, k % 5, len)
        })
        .collect()
}

/// 50 random profiles (`m, n ≤ 16`, some zero cells) with pairs drawn from
/// `p* ∈ {1.2, 1.5, 2}`, `q ∈ {2, 3, 4, 8}`.
pub fn sigma_corpus(seed: u64) -> Vec<(VarianceProfile, NormPair)> {
    const PS: [f64; 3] = [1.2, 1.5, 2.0];
    const QS: [f64; 4] = [2.0, 3.0, 4.0, 8.0];
    (0..50)
        .map(|k| {
            let mut s = stream(seed, SIGMA_TAG, k);
            let m = uniform_int(&mut s, 1, 16);
            let n = uniform_int(&mut s, 1, 16);
            let mut a = Matrix::zeros(m, n);
            for i in 0..m {
                for j in 0..n {
                    let u = s.next_uniform();
                    a.set(i, j, if u < 0.2 { 0.0 } else { s.next_uniform() * 2.0 });
                }
            }
            let pair = NormPair::new(PS[uniform_int(&mut s, 0, 2)], QS[uniform_int(&mut s, 0, 3)])
                .expect("corpus pairs are valid");
            (VarianceProfile::new(a).expect("corpus entries are valid"), pair)
        })
        .collect()
}

/// `count` matrices with standard normal entries, `rows × cols` drawn from the given ranges.
pub fn gaussian_matrices(
    seed: u64,
    count: usize,
    rows: (usize, usize),
    cols: (usize, usize),
) -> Vec<Matrix> {
    (0..count)
        .map(|k| {
            let mut s = stream(seed, MATRIX_TAG, k);
            let m = uniform_int(&mut s, rows.0, rows.1);
            let n = uniform_int(&mut s, cols.0, cols.1);
            let data = (0..m * n).map(|_| s.next_normal()).collect();
            Matrix::from_vec(m, n, data).expect("shape matches")
        })
        .collect()
}
