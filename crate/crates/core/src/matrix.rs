//! Dense row-major matrices and the ℓ_r vector norms used throughout the crate.

use std::fmt;

use crate::error::{Error, Result};

/// Dense `rows × cols` matrix of `f64`, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimensions { m: rows, n: cols });
        }
        if data.len() != rows * cols {
            return Err(Error::Shape {
                expected: format!("{} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must share one length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(m * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::Shape {
                    expected: format!("{n} columns"),
                    got: format!("{} columns in row {i}", r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(m, n, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| c * v).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// `out = self · y`.
    pub fn mul_vec_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(y, &mut out);
        out
    }

    /// `out = selfᵀ · u`.
    pub fn tmul_vec_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += ui * a;
            }
        }
    }

    pub fn tmul_vec(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.tmul_vec_into(u, &mut out);
        out
    }

    /// Parses the plain-text matrix format: a header `m n`, then `m` lines of
    /// `n` whitespace-separated decimals. Blank lines and `#` comments are skipped.
    /// Negative entries are rejected unless `allow_negative` is set.
    pub fn parse_text(text: &str, allow_negative: bool) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing `m n` header".into() })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(Error::Parse { line: hline, msg: format!("expected `m n`, got `{header}`") });
        }
        let parse_dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Parse { line: hline, msg: format!("bad dimension `{s}`: {e}") })
        };
        let (m, n) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
        if m == 0 || n == 0 {
            return Err(Error::Parse { line: hline, msg: format!("dimensions must be positive, got {m} {n}") });
        }

        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            let (line, body) = lines.next().ok_or(Error::Parse {
                line: hline + i + 1,
                msg: format!("expected {m} data rows, found {i}"),
            })?;
            let mut count = 0;
            for tok in body.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|e| Error::Parse { line, msg: format!("bad number `{tok}`: {e}") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { line, msg: format!("non-finite entry `{tok}`") });
                }
                if v < 0.0 && !allow_negative {
                    return Err(Error::Parse { line, msg: format!("negative entry `{tok}`") });
                }
                data.push(v);
                count += 1;
            }
            if count != n {
                return Err(Error::Parse { line, msg: format!("expected {n} entries, found {count}") });
            }
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse { line, msg: format!("trailing data after {m} rows") });
        }
        Self::from_vec(m, n, data)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:?}")).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// `|x|^e`, with integer fast paths for the common exponents.
#[inline]
pub fn pow_abs(x: f64, e: f64) -> f64 {
    let a = x.abs();
    if e == 1.0 {
        a
    } else if e == 2.0 {
        a * a
    } else if e.fract() == 0.0 && e > 0.0 && e <= 16.0 {
        a.powi(e as i32)
    } else {
        a.powf(e)
    }
}

/// ℓ_r norm for `r ∈ [1, ∞]`. Computed as `max · ‖x / max‖_r` so large `r`
/// cannot overflow.
pub fn lp_norm(x: &[f64], r: f64) -> f64 {
    let amax = x.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    if amax == 0.0 || r.is_infinite() {
        return amax;
    }
    if r == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    let s: f64 = x.iter().map(|v| pow_abs(v / amax, r)).sum();
    amax * s.powf(1.0 / r)
}

/// Conjugate exponent `r / (r - 1)`, with `1 ↔ ∞`.
pub fn conjugate(r: f64) -> f64 {
    if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_basic() {
        assert_eq!(lp_norm(&[3.0, -4.0], 2.0), 5.0);
        assert_eq!(lp_norm(&[3.0, -4.0], 1.0), 7.0);
        assert_eq!(lp_norm(&[3.0, -4.0], f64::INFINITY), 4.0);
        assert_eq!(lp_norm(&[0.0, 0.0], 3.0), 0.0);
        let big = lp_norm(&[1e200, 1e200], 64.0);
        assert!((big / 1e200 - 2f64.powf(1.0 / 64.0)).abs() < 1e-14);
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate(2.0), 2.0);
        assert_eq!(conjugate(1.0), f64::INFINITY);
        assert_eq!(conjugate(f64::INFINITY), 1.0);
        assert!((1.0 / conjugate(1.5) + 1.0 / 1.5 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let m = Matrix::parse_text("2 2\n1 2\n3 4.5\n", false).unwrap();
        assert_eq!(m.get(1, 1), 4.5);
        assert_eq!(Matrix::parse_text(&m.to_text(), false).unwrap(), m);

        let err = Matrix::parse_text("2 2\n1 2\n3 -4\n", false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = Matrix::parse_text("1 2\n1 NaN\n", true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = Matrix::parse_text("1 3\n1 2\n", false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(Matrix::parse_text("1 1\n-2\n", true).is_ok());
    }

    #[test]
    fn matvec() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        assert_eq!(m.mul_vec(&[1.0, -1.0]), vec![-1.0, -1.0, -1.0]);
        assert_eq!(m.tmul_vec(&[1.0, 0.0, 1.0]), vec![6.0, 8.0]);
        assert_eq!(m.transpose().transpose(), m);
    }
}
