//! Variance profiles `(a_ij)` and exponent pairs.
//!
//! A [`VarianceProfile`] stores **standard deviations**: entry `(i, j)` of a
//! realization is `a_ij · g_ij` with `g_ij` standard normal, so the entry
//! variance is `a_ij²`. Every bound in [`crate::bounds`] is written in `a_ij`
//! directly.
//!
//! Convention: an `m × n` profile generates a matrix acting from `ℝⁿ`
//! (normed by ℓ_{p*}) to `ℝᵐ` (normed by ℓ_q). Rows `X_i ∈ ℝⁿ`, `i ≤ m`.

use crate::error::{Error, Result};
use crate::matrix::{conjugate, lp_norm, Matrix};

/// Nonnegative `m × n` array of entrywise standard-deviation scales.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceProfile {
    a: Matrix,
}

impl VarianceProfile {
    pub fn new(a: Matrix) -> Result<Self> {
        for i in 0..a.rows() {
            for (j, &v) in a.row(i).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j, value: v });
                }
                if v < 0.0 {
                    return Err(Error::Negative { row: i, col: j, value: v });
                }
            }
        }
        Ok(Self { a })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Parses the profile text format (see [`Matrix::parse_text`]); negatives rejected.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(Matrix::parse_text(text, false)?)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a.get(i, j)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn transpose(&self) -> Self {
        Self { a: self.a.transpose() }
    }

    /// Profile scaled by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.a.scaled(c))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero()
    }

    pub fn max_entry(&self) -> f64 {
        self.a.max_abs()
    }

    /// All entries, row-major.
    pub fn entries(&self) -> &[f64] {
        self.a.as_slice()
    }

    /// `max_i ‖(a_ij)_j‖_r`.
    pub fn row_norm_max(&self, r: f64) -> Result<f64> {
        check_norm_exponent(r)?;
        Ok((0..self.m()).map(|i| lp_norm(self.a.row(i), r)).fold(0.0, f64::max))
    }

    /// `max_j ‖(a_ij)_i‖_r`.
    pub fn col_norm_max(&self, r: f64) -> Result<f64> {
        check_norm_exponent(r)?;
        Ok((0..self.n()).map(|j| lp_norm(&self.a.column(j), r)).fold(0.0, f64::max))
    }

    /// Largest Euclidean norm over all rows and columns.
    pub fn bvh_mixed_norm(&self) -> f64 {
        let rows = self.row_norm_max(2.0).expect("2 is a valid exponent");
        let cols = self.col_norm_max(2.0).expect("2 is a valid exponent");
        rows.max(cols)
    }
}

fn check_norm_exponent(r: f64) -> Result<()> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::Exponent(r, "norm exponent must lie in [1, inf]"));
    }
    Ok(())
}

fn check_weights(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Empty);
    }
    for (k, &x) in v.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::Domain(format!("{what}[{k}] = {x}: entries must be finite and >= 0")));
        }
    }
    Ok(())
}

/// Constant profile `a_ij = s` (the i.i.d. setting when `s = 1`).
pub fn make_iid(m: usize, n: usize, s: f64) -> Result<VarianceProfile> {
    if m == 0 || n == 0 {
        return Err(Error::Dimensions { m, n });
    }
    if !s.is_finite() || s < 0.0 {
        return Err(Error::Domain(format!("scale {s} must be finite and >= 0")));
    }
    VarianceProfile::new(Matrix::from_vec(m, n, vec![s; m * n])?)
}

/// Rank-one profile `a_ij = x_j · y_i`; `x` has length `n`, `y` length `m`.
pub fn make_tensor(x: &[f64], y: &[f64]) -> Result<VarianceProfile> {
    check_weights(x, "x")?;
    check_weights(y, "y")?;
    let data = y.iter().flat_map(|&yi| x.iter().map(move |&xj| xj * yi)).collect();
    VarianceProfile::new(Matrix::from_vec(y.len(), x.len(), data)?)
}

/// Square diagonal profile with `a_ii = d_i`.
pub fn make_diagonal(d: &[f64]) -> Result<VarianceProfile> {
    check_weights(d, "d")?;
    let n = d.len();
    let mut a = Matrix::zeros(n, n);
    for (i, &v) in d.iter().enumerate() {
        a.set(i, i, v);
    }
    VarianceProfile::new(a)
}

/// Exponent pair `(p*, q)` with `1 ≤ p* ≤ 2 ≤ q ≤ ∞`; `p` is the conjugate of `p*`.
///
/// `q = f64::INFINITY` and `p = f64::INFINITY` (when `p* = 1`) are the
/// infinite sentinels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormPair {
    p_star: f64,
    q: f64,
    p: f64,
}

impl NormPair {
    pub fn new(p_star: f64, q: f64) -> Result<Self> {
        let ok = p_star.is_finite() && (1.0..=2.0).contains(&p_star) && !q.is_nan() && q >= 2.0;
        if !ok {
            return Err(Error::Pair { p_star, q });
        }
        Ok(Self { p_star, q, p: conjugate(p_star) })
    }

    #[inline]
    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Conjugate of `p*`; infinite when `p* = 1`.
    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Inside the main theorem's range `1 < p* ≤ 2 ≤ q < ∞`.
    pub fn in_theorem_range(&self) -> bool {
        self.p_star > 1.0 && self.q.is_finite()
    }

    pub fn label(&self) -> String {
        format!("p*={},q={}", fmt_exp(self.p_star), fmt_exp(self.q))
    }
}

pub(crate) fn fmt_exp(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const INF: f64 = f64::INFINITY;

    fn rows(p: &VarianceProfile) -> Vec<Vec<f64>> {
        (0..p.m()).map(|i| p.matrix().row(i).to_vec()).collect()
    }

    #[test]
    fn constructors() {
        assert_eq!(rows(&make_iid(2, 2, 1.0).unwrap()), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(rows(&make_iid(1, 3, 0.0).unwrap()), vec![vec![0.0; 3]]);
        let half = make_iid(3, 2, 0.5).unwrap();
        assert_eq!((half.m(), half.n()), (3, 2));
        assert!(half.entries().iter().all(|&v| v == 0.5));

        assert_eq!(rows(&make_tensor(&[1.0, 2.0], &[3.0, 1.0]).unwrap()), vec![vec![3.0, 6.0], vec![1.0, 2.0]]);
        assert_eq!(rows(&make_tensor(&[1.0], &[1.0]).unwrap()), vec![vec![1.0]]);
        assert_eq!(rows(&make_tensor(&[0.0, 1.0], &[1.0, 1.0]).unwrap()), vec![vec![0.0, 1.0], vec![0.0, 1.0]]);

        assert_eq!(rows(&make_diagonal(&[1.0, 2.0]).unwrap()), vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
        assert_eq!(rows(&make_diagonal(&[0.0]).unwrap()), vec![vec![0.0]]);
        let d5 = make_diagonal(&[5.0; 3]).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| d5.get(i, j) == if i == j { 5.0 } else { 0.0 })));
    }

    #[test]
    fn constructor_errors() {
        assert!(make_iid(0, 2, 1.0).is_err());
        assert!(make_iid(2, 0, 1.0).is_err());
        assert!(make_iid(2, 2, f64::NAN).is_err());
        assert!(make_iid(2, 2, INF).is_err());
        assert!(make_tensor(&[], &[1.0]).is_err());
        assert!(make_tensor(&[1.0], &[-1.0]).is_err());
        assert!(make_diagonal(&[]).is_err());
        assert!(VarianceProfile::from_rows(&[[1.0, -0.5]]).is_err());
    }

    #[test]
    fn row_and_column_norms() {
        let p = VarianceProfile::from_rows(&[[3.0, 4.0], [0.0, 1.0]]).unwrap();
        assert_eq!(p.row_norm_max(2.0).unwrap(), 5.0);
        assert_eq!(p.row_norm_max(INF).unwrap(), 4.0);
        assert_eq!(p.col_norm_max(2.0).unwrap(), 17f64.sqrt());
        assert_eq!(p.col_norm_max(1.0).unwrap(), 5.0);
        assert_eq!(p.bvh_mixed_norm(), 5.0);
        assert!(p.row_norm_max(0.5).is_err());
        assert!(p.col_norm_max(f64::NAN).is_err());

        let z = make_iid(3, 4, 0.0).unwrap();
        for r in [1.0, 2.0, 7.5, INF] {
            assert_eq!(z.row_norm_max(r).unwrap(), 0.0);
        }
        let seven = VarianceProfile::from_rows(&[[7.0]]).unwrap();
        assert_eq!(seven.col_norm_max(3.0).unwrap(), 7.0);

        let id = make_diagonal(&[1.0, 1.0]).unwrap();
        assert_eq!(id.bvh_mixed_norm(), 1.0);
        let row = VarianceProfile::from_rows(&[[1.0, 1.0, 1.0]]).unwrap();
        assert!((row.bvh_mixed_norm() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn parse_profile_file() {
        let p = VarianceProfile::parse("2 3\n1 2 3\n0 0.5 0\n").unwrap();
        assert_eq!((p.m(), p.n()), (2, 3));
        let err = VarianceProfile::parse("1 2\n1 -1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = VarianceProfile::parse("1 2\n1 nan\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn norm_pair_validation() {
        let pr = NormPair::new(1.0, INF).unwrap();
        assert_eq!(pr.p(), INF);
        assert!(!pr.in_theorem_range());
        let pr = NormPair::new(1.5, 3.0).unwrap();
        assert!((1.0 / pr.p() + 1.0 / pr.p_star() - 1.0).abs() < 1e-15);
        assert!(pr.in_theorem_range());
        assert!(NormPair::new(2.5, 3.0).is_err());
        assert!(NormPair::new(0.5, 3.0).is_err());
        assert!(NormPair::new(1.5, 1.9).is_err());
        assert!(NormPair::new(INF, 3.0).is_err());
    }

    fn profile_strategy() -> impl Strategy<Value = VarianceProfile> {
        (1usize..6, 1usize..6).prop_flat_map(|(m, n)| {
            proptest::collection::vec(0.0f64..10.0, m * n)
                .prop_map(move |v| VarianceProfile::new(Matrix::from_vec(m, n, v).unwrap()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn row_norm_decreasing_in_r(p in profile_strategy(), r1 in 1.0f64..20.0, dr in 0.0f64..20.0) {
            let r2 = r1 + dr;
            let a = p.row_norm_max(r1).unwrap();
            let b = p.row_norm_max(r2).unwrap();
            prop_assert!(a >= b * (1.0 - 1e-12));
            prop_assert!(b >= p.row_norm_max(INF).unwrap() * (1.0 - 1e-12));
        }

        #[test]
        fn tensor_rows_separate(
            x in proptest::collection::vec(0.0f64..5.0, 1..6),
            y in proptest::collection::vec(0.0f64..5.0, 1..6),
            r in prop_oneof![Just(1.0), Just(2.0), 1.0f64..9.0, Just(INF)],
        ) {
            let p = make_tensor(&x, &y).unwrap();
            let ymax = y.iter().cloned().fold(0.0, f64::max);
            let expect = ymax * lp_norm(&x, r);
            let got = p.row_norm_max(r).unwrap();
            prop_assert!((got - expect).abs() <= 1e-12 * (1.0 + expect));
        }

        #[test]
        fn bvh_transpose_invariant(p in profile_strategy()) {
            prop_assert_eq!(p.bvh_mixed_norm(), p.transpose().bvh_mixed_norm());
        }

        #[test]
        fn constructors_are_pure(d in proptest::collection::vec(0.0f64..5.0, 1..6)) {
            prop_assert_eq!(make_diagonal(&d).unwrap(), make_diagonal(&d).unwrap());
            prop_assert_eq!(make_tensor(&d, &d).unwrap(), make_tensor(&d, &d).unwrap());
        }
    }
}
