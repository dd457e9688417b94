//! Profile-family and weight-vector descriptors used in sweep configs.
//!
//! Profile families (`m × n`, rows `i`, columns `j`, zero-based):
//!
//! | spec               | `a_ij`                                  |
//! |--------------------|-----------------------------------------|
//! | `iid:s`            | `s`                                     |
//! | `tensor-geom:r`    | `r^j · r^i`                             |
//! | `tensor-power:α`   | `(j+1)^{−α} · (i+1)^{−α}`               |
//! | `tensor-unit`      | `1` at `(0, 0)`, else `0`               |
//! | `diag-power:α`     | `(i+1)^{−α}` on the diagonal, else `0`  |
//! | `sparse:ρ`         | `1` with probability `ρ`, else `0`      |
//!
//! Sparse masks are drawn from the run seed and the shape, so they are fixed
//! for a given config.
//!
//! Weight vectors: `ones:k`, `geom:k:r`, `power:k:α`, `list:a,b,c`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::profiles::{make_tensor, VarianceProfile};
use crate::sampling::{KeyedStream, SampleKey};

const SPARSE_TAG: u64 = 0x5350_0000_0000_0000;

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileSpec {
    Iid(f64),
    TensorGeom(f64),
    TensorPower(f64),
    TensorUnit,
    DiagPower(f64),
    Sparse(f64),
}

fn bad(spec: &str, why: &str) -> Error {
    Error::Domain(format!("bad spec `{spec}`: {why}"))
}

fn param(spec: &str, s: Option<&str>) -> Result<f64> {
    let s = s.ok_or_else(|| bad(spec, "missing parameter"))?;
    let v: f64 = s.trim().parse().map_err(|_| bad(spec, "parameter is not a number"))?;
    if !v.is_finite() {
        return Err(bad(spec, "parameter must be finite"));
    }
    Ok(v)
}

impl ProfileSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let mut parts = spec.trim().splitn(2, ':');
        let family = parts.next().unwrap_or_default();
        let arg = parts.next();
        let out = match family {
            "iid" => {
                let s = param(spec, arg)?;
                if s < 0.0 {
                    return Err(bad(spec, "scale must be >= 0"));
                }
                ProfileSpec::Iid(s)
            }
            "tensor-geom" => {
                let r = param(spec, arg)?;
                if !(r > 0.0 && r <= 1.0) {
                    return Err(bad(spec, "ratio must lie in (0, 1]"));
                }
                ProfileSpec::TensorGeom(r)
            }
            "tensor-power" | "diag-power" => {
                let a = param(spec, arg)?;
                if a < 0.0 {
                    return Err(bad(spec, "exponent must be >= 0"));
                }
                if family == "diag-power" {
                    ProfileSpec::DiagPower(a)
                } else {
                    ProfileSpec::TensorPower(a)
                }
            }
            "tensor-unit" if arg.is_none() => ProfileSpec::TensorUnit,
            "sparse" => {
                let rho = param(spec, arg)?;
                if !(0.0..=1.0).contains(&rho) {
                    return Err(bad(spec, "density must lie in [0, 1]"));
                }
                ProfileSpec::Sparse(rho)
            }
            _ => return Err(bad(spec, "unknown family")),
        };
        Ok(out)
    }

    /// Canonical text form; parses back to the same spec.
    pub fn label(&self) -> String {
        match self {
            ProfileSpec::Iid(s) => format!("iid:{s}"),
            ProfileSpec::TensorGeom(r) => format!("tensor-geom:{r}"),
            ProfileSpec::TensorPower(a) => format!("tensor-power:{a}"),
            ProfileSpec::TensorUnit => "tensor-unit".into(),
            ProfileSpec::DiagPower(a) => format!("diag-power:{a}"),
            ProfileSpec::Sparse(rho) => format!("sparse:{rho}"),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, ProfileSpec::DiagPower(_))
    }

    /// `(x, y)` with `a_ij = x_j y_i`, for the families that are rank one.
    pub fn tensor_factors(&self, m: usize, n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let both = |f: &dyn Fn(usize) -> f64| ((0..n).map(f).collect(), (0..m).map(f).collect());
        match *self {
            ProfileSpec::Iid(s) => Some((vec![s; n], vec![1.0; m])),
            ProfileSpec::TensorGeom(r) => Some(both(&|k| r.powi(k as i32))),
            ProfileSpec::TensorPower(a) => Some(both(&|k| ((k + 1) as f64).powf(-a))),
            ProfileSpec::TensorUnit => Some(both(&|k| if k == 0 { 1.0 } else { 0.0 })),
            _ => None,
        }
    }

    pub fn build(&self, m: usize, n: usize, seed: u64) -> Result<VarianceProfile> {
        if m == 0 || n == 0 {
            return Err(Error::Dimensions { m, n });
        }
        if let Some((x, y)) = self.tensor_factors(m, n) {
            return make_tensor(&x, &y);
        }
        let mut a = Matrix::zeros(m, n);
        match *self {
            ProfileSpec::DiagPower(alpha) => {
                for i in 0..m.min(n) {
                    a.set(i, i, ((i + 1) as f64).powf(-alpha));
                }
            }
            ProfileSpec::Sparse(rho) => {
                let mut s = KeyedStream::new(SampleKey::new(seed, SPARSE_TAG | ((m as u64) << 24) | n as u64));
                for i in 0..m {
                    for j in 0..n {
                        if s.next_uniform() < rho {
                            a.set(i, j, 1.0);
                        }
                    }
                }
            }
            _ => unreachable!("tensor families handled above"),
        }
        VarianceProfile::new(a)
    }
}

/// Parses a weight-vector descriptor.
pub fn parse_weights(spec: &str) -> Result<Vec<f64>> {
    let spec_t = spec.trim();
    let (family, rest) = spec_t.split_once(':').ok_or_else(|| bad(spec, "expected family:args"))?;
    let len = |s: &str| -> Result<usize> {
        let k: usize = s.trim().parse().map_err(|_| bad(spec, "length is not an integer"))?;
        if k == 0 {
            return Err(bad(spec, "length must be >= 1"));
        }
        Ok(k)
    };
    let v = match family {
        "ones" => vec![1.0; len(rest)?],
        "geom" | "power" => {
            let (k, x) = rest.split_once(':').ok_or_else(|| bad(spec, "expected k:param"))?;
            let (k, x) = (len(k)?, param(spec, Some(x))?);
            if family == "geom" {
                (0..k).map(|i| x.powi(i as i32)).collect()
            } else {
                (0..k).map(|i| ((i + 1) as f64).powf(-x)).collect()
            }
        }
        "list" => rest.split(',').map(|s| param(spec, Some(s))).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad(spec, "unknown weight family")),
    };
    if v.iter().any(|x| !x.is_finite()) {
        return Err(bad(spec, "weights must be finite"));
    }
    Ok(v)
}
