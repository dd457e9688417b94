//! Monte Carlo estimates of the left-hand sides, with normal-approximation
//! confidence intervals, and empirical tail frequencies.
//!
//! Sample `k` of a run with seed `s` always uses `SampleKey(s, k)`. Samples are
//! computed in parallel and reduced in index order, so every result is
//! independent of the number of worker threads.

use std::io::Write;

use rayon::prelude::*;

use crate::csvfmt;
use crate::error::{Error, Result};
use crate::matrix::lp_norm;
use crate::pqnorm::{op_norm, PowerOptions};
use crate::profiles::{NormPair, VarianceProfile};
use crate::sampling::{sample_matrix, sample_weighted_vector, SampleKey};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateResult {
    pub mean: f64,
    /// `(mean of vᵠ)^{1/q}`, when a finite `q` was requested.
    pub q_moment_root: Option<f64>,
    /// Delta-method standard error of `q_moment_root`.
    pub q_moment_std_err: Option<f64>,
    pub std_err: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_samples: usize,
    pub seed: u64,
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    Ok(())
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

/// Reduces per-sample values (in index order) to an [`EstimateResult`].
pub fn summarize(values: &[f64], q: Option<f64>, seed: u64) -> Result<EstimateResult> {
    check_n(values.len())?;
    let (mean, std_err) = mean_and_se(values);
    let (q_moment_root, q_moment_std_err) = match q {
        Some(q) if q.is_finite() => {
            let (r, se) = q_root(values, q);
            (Some(r), Some(se))
        }
        _ => (None, None),
    };
    Ok(EstimateResult {
        mean,
        q_moment_root,
        q_moment_std_err,
        std_err,
        ci_lo: mean - Z95 * std_err,
        ci_hi: mean + Z95 * std_err,
        n_samples: values.len(),
        seed,
    })
}

/// `R = (mean vᵠ)^{1/q}` and `se(R) = R^{1−q}·se(mean vᵠ)/q`, computed on
/// values scaled by their maximum to keep `vᵠ` in range.
fn q_root(values: &[f64], q: f64) -> (f64, f64) {
    let vmax = values.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    if vmax == 0.0 {
        return (0.0, 0.0);
    }
    let powered: Vec<f64> = values.iter().map(|v| (v.abs() / vmax).powf(q)).collect();
    let (mq, se_mq) = mean_and_se(&powered);
    let r = mq.powf(1.0 / q);
    let se = r.powf(1.0 - q) * se_mq / q;
    (vmax * r, vmax * se)
}

/// Operator norms of `N` realizations, in sample order.
pub fn opnorm_samples(
    profile: &VarianceProfile,
    pair: NormPair,
    n: usize,
    seed: u64,
    opts: &PowerOptions,
) -> Result<Vec<f64>> {
    check_n(n)?;
    (0..n as u64)
        .into_par_iter()
        .map(|k| op_norm(&sample_matrix(profile, SampleKey::new(seed, k)), pair, opts).map(|r| r.value))
        .collect()
}

/// `E‖G‖` and `(E‖G‖^q)^{1/q}`.
pub fn estimate_opnorm(
    profile: &VarianceProfile,
    pair: NormPair,
    n: usize,
    seed: u64,
    opts: &PowerOptions,
) -> Result<EstimateResult> {
    let v = opnorm_samples(profile, pair, n, seed, opts)?;
    summarize(&v, Some(pair.q()), seed)
}

/// `max_ij |a_ij g_ij|` per sample.
pub fn entry_max_samples(profile: &VarianceProfile, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_n(n)?;
    Ok((0..n as u64)
        .into_par_iter()
        .map(|k| sample_matrix(profile, SampleKey::new(seed, k)).max_abs())
        .collect())
}

pub fn estimate_entry_max(profile: &VarianceProfile, n: usize, seed: u64) -> Result<EstimateResult> {
    summarize(&entry_max_samples(profile, n, seed)?, None, seed)
}

/// `(E max_i ‖X_i‖_p^q)^{1/q}` over the rows `X_i` of `G`.
pub fn estimate_rowmax_qmoment(
    profile: &VarianceProfile,
    pair: NormPair,
    n: usize,
    seed: u64,
) -> Result<EstimateResult> {
    check_n(n)?;
    let p = pair.p();
    if p.is_infinite() {
        return Err(Error::Exponent(pair.p_star(), "row-max moment needs p* > 1"));
    }
    let v: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let g = sample_matrix(profile, SampleKey::new(seed, k));
            (0..g.rows()).map(|i| lp_norm(g.row(i), p)).fold(0.0, f64::max)
        })
        .collect();
    summarize(&v, Some(pair.q()), seed)
}

/// Wilson score interval for `k` successes out of `n`: `(lo, hi)`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    let (nf, ph) = (n as f64, k as f64 / n as f64);
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (ph + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (ph * (1.0 - ph) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailEstimate {
    /// First-pass estimate of `E‖X‖_p`.
    pub center: f64,
    pub t_grid: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// Half-width of the 95% Wilson interval at each grid point.
    pub half_widths: Vec<f64>,
    pub wilson_hi: Vec<f64>,
    pub n_samples: usize,
    /// All weights zero: nothing is random, frequencies are reported as 0.
    pub degenerate: bool,
}

/// Frequencies of `|‖X‖_p − E‖X‖_p| > t` for `X = (a_j g_j)`.
///
/// The center comes from samples `0..N`; the frequencies from the
/// independent samples `N..2N`.
pub fn empirical_tail(a: &[f64], p: f64, n: usize, seed: u64, t_grid: &[f64]) -> Result<TailEstimate> {
    check_n(n)?;
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::Exponent(p, "tail estimate needs finite p >= 1"));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("weights must be finite".into()));
    }
    if t_grid.is_empty() || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("t grid must be positive and strictly increasing".into()));
    }
    let norm_at = |k: u64| lp_norm(&sample_weighted_vector(a, SampleKey::new(seed, k)), p);
    let nn = n as u64;
    if a.iter().all(|&v| v == 0.0) {
        let zeros = vec![0.0; t_grid.len()];
        return Ok(TailEstimate {
            center: 0.0,
            t_grid: t_grid.to_vec(),
            frequencies: zeros.clone(),
            half_widths: zeros.clone(),
            wilson_hi: zeros,
            n_samples: n,
            degenerate: true,
        });
    }
    let first: Vec<f64> = (0..nn).into_par_iter().map(norm_at).collect();
    let center = first.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = (nn..2 * nn).into_par_iter().map(|k| (norm_at(k) - center).abs()).collect();

    let mut frequencies = Vec::with_capacity(t_grid.len());
    let mut half_widths = Vec::with_capacity(t_grid.len());
    let mut wilson_hi = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let k = dev.iter().filter(|&&d| d > t).count();
        let (lo, hi) = wilson_interval(k, n, Z95);
        frequencies.push(k as f64 / n as f64);
        half_widths.push(0.5 * (hi - lo));
        wilson_hi.push(hi);
    }
    Ok(TailEstimate { center, t_grid: t_grid.to_vec(), frequencies, half_widths, wilson_hi, n_samples: n, degenerate: false })
}

/// Writes `sample_index,value` rows.
pub fn write_samples_csv<W: Write>(mut w: W, values: &[f64]) -> std::io::Result<()> {
    writeln!(w, "sample_index,value")?;
    for (k, v) in values.iter().enumerate() {
        writeln!(w, "{k},{}", csvfmt::float(*v))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::expected_max_abs;
    use crate::profiles::{make_diagonal, make_iid};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_2_PI;

    fn pair(ps: f64, q: f64) -> NormPair {
        NormPair::new(ps, q).unwrap()
    }

    fn std_normal_cdf(x: f64) -> f64 {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn zero_profile() {
        let z = make_iid(3, 4, 0.0).unwrap();
        let e = estimate_opnorm(&z, pair(1.5, 3.0), 10, 0, &PowerOptions::default()).unwrap();
        assert_eq!((e.mean, e.std_err, e.q_moment_root), (0.0, 0.0, Some(0.0)));
        assert_eq!(estimate_entry_max(&z, 10, 0).unwrap().mean, 0.0);
        assert_eq!(estimate_rowmax_qmoment(&z, pair(1.5, 3.0), 10, 0).unwrap().q_moment_root, Some(0.0));
    }

    #[test]
    fn one_by_one_abs_gaussian() {
        let p = make_iid(1, 1, 1.0).unwrap();
        let e = estimate_opnorm(&p, pair(2.0, 2.0), 100_000, 1, &PowerOptions::default()).unwrap();
        assert!((e.mean - FRAC_2_PI.sqrt()).abs() <= 4.0 * e.std_err, "{e:?}");
        let r = estimate_rowmax_qmoment(&p, pair(2.0, 2.0), 100_000, 2).unwrap();
        assert!((r.q_moment_root.unwrap() - 1.0).abs() <= 4.0 * r.q_moment_std_err.unwrap(), "{r:?}");
    }

    #[test]
    fn repeatable() {
        let p = make_iid(4, 5, 0.7).unwrap();
        let opts = PowerOptions::default();
        let a = estimate_opnorm(&p, pair(1.5, 4.0), 50, 9, &opts).unwrap();
        let b = estimate_opnorm(&p, pair(1.5, 4.0), 50, 9, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let p = make_iid(6, 5, 1.0).unwrap();
        let opts = PowerOptions::default();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| opnorm_samples(&p, pair(1.25, 3.0), 40, 3, &opts).unwrap())
        };
        let one = run(1);
        assert_eq!(one.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), run(4).iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn entry_max_matches_quadrature() {
        let d = [1.0, 0.5, 0.5, 0.2, 2.0];
        let e = estimate_entry_max(&make_diagonal(&d).unwrap(), 100_000, 5).unwrap();
        let exact = expected_max_abs(&d).unwrap();
        assert!((e.mean - exact).abs() <= 4.0 * e.std_err, "{} vs {exact}", e.mean);
    }

    #[test]
    fn diagonal_zeros_are_inert() {
        let d = [1.0, 0.3, 0.7];
        let diag = entry_max_samples(&make_diagonal(&d).unwrap(), 200, 4).unwrap();
        let row = entry_max_samples(&VarianceProfile::from_rows(&[d]).unwrap(), 200, 4).unwrap();
        // same law, different positions: compare the first two moments loosely
        let (m1, s1) = mean_and_se(&diag);
        let (m2, s2) = mean_and_se(&row);
        assert!((m1 - m2).abs() <= 5.0 * (s1 * s1 + s2 * s2).sqrt());
    }

    #[test]
    fn rowmax_rejects_p_star_one() {
        let p = make_iid(2, 2, 1.0).unwrap();
        assert!(estimate_rowmax_qmoment(&p, pair(1.0, 2.0), 10, 0).is_err());
        assert!(estimate_opnorm(&p, pair(2.0, 2.0), 1, 0, &PowerOptions::default()).is_err());
    }

    #[test]
    fn ci_calibration_smoke() {
        let p = make_iid(1, 1, 1.0).unwrap();
        let truth = FRAC_2_PI.sqrt();
        let covered = (0..100u64)
            .filter(|&s| {
                let e = estimate_opnorm(&p, pair(2.0, 2.0), 1000, 1000 + s, &PowerOptions::default()).unwrap();
                e.ci_lo <= truth && truth <= e.ci_hi
            })
            .count();
        assert!(covered >= 88, "{covered}/100");
    }

    #[test]
    fn wilson_reference_values() {
        // k=0: upper limit z²/(n+z²)
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert!(lo.abs() < 1e-15);
        assert!((hi - Z95 * Z95 / (100.0 + Z95 * Z95)).abs() < 1e-15);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo + hi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_single_coordinate_exact() {
        let t_grid = [0.25, 0.5, 1.0, 1.5, 2.0];
        let est = empirical_tail(&[1.0], 2.0, 100_000, 8, &t_grid).unwrap();
        assert!((est.center - FRAC_2_PI.sqrt()).abs() < 0.02);
        let c = est.center;
        for (k, &t) in t_grid.iter().enumerate() {
            // P(|g| > c + t) + P(|g| < c − t)
            let upper = 2.0 * (1.0 - std_normal_cdf(c + t));
            let lower = if c > t { 2.0 * std_normal_cdf(c - t) - 1.0 } else { 0.0 };
            let exact = upper + lower;
            let hw = est.half_widths[k];
            // Wilson interval plus slack for the noise in the center
            assert!((est.frequencies[k] - exact).abs() <= 2.0 * hw + 0.01, "t={t}: {} vs {exact}", est.frequencies[k]);
            assert!(est.frequencies[k] <= 2.0 * (-t * t / 2.0).exp() + hw);
        }
    }

    #[test]
    fn tail_nonincreasing_and_padding_inert() {
        let t_grid = [0.1, 0.3, 0.6, 1.0];
        let a = [1.0, 0.5, 0.25];
        let est = empirical_tail(&a, 1.5, 20_000, 1, &t_grid).unwrap();
        for k in 1..t_grid.len() {
            assert!(est.frequencies[k] <= est.frequencies[k - 1] + est.half_widths[k]);
        }
        let padded = empirical_tail(&[1.0, 0.5, 0.25, 0.0, 0.0], 1.5, 20_000, 1, &t_grid).unwrap();
        assert_eq!(est.frequencies, padded.frequencies);
    }

    #[test]
    fn tail_degenerate_and_errors() {
        let est = empirical_tail(&[0.0, 0.0], 2.0, 10, 0, &[1.0]).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.frequencies, vec![0.0]);
        assert!(empirical_tail(&[1.0], f64::INFINITY, 10, 0, &[1.0]).is_err());
        assert!(empirical_tail(&[1.0], 2.0, 10, 0, &[1.0, 0.5]).is_err());
        assert!(empirical_tail(&[1.0], 2.0, 10, 0, &[0.0]).is_err());
    }

    #[test]
    fn samples_csv_layout() {
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &[1.5, 0.25]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().collect::<Vec<_>>(), ["sample_index,value", "0,1.5000000000000000e0", "1,2.5000000000000000e-1"]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn summary_invariants(v in prop::collection::vec(0.0f64..50.0, 2..200), q in 2.0f64..10.0) {
            let e = summarize(&v, Some(q), 0).unwrap();
            prop_assert!(e.ci_lo <= e.mean && e.mean <= e.ci_hi);
            let r = e.q_moment_root.unwrap();
            prop_assert!(e.mean <= r + 1e-9 * (1.0 + e.mean));
            let n = v.len() as f64;
            let sd = (v.iter().map(|x| (x - e.mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            prop_assert!((e.std_err - sd / n.sqrt()).abs() <= 1e-12 * (1.0 + sd));
        }
    }
}
