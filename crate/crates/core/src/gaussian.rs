//! Deterministic Gaussian quantities: moments `γ_r`, expected maxima of
//! weighted Gaussians, the `√ln(i+3)` comparator, the Orlicz function `M_g`
//! with its Luxemburg norm, and the concentration tail.

use std::f64::consts::{FRAC_2_PI, SQRT_2};

use libm::{erfc, lgamma};

use crate::error::{Error, Result};
use crate::matrix::lp_norm;
use crate::quad::integrate;

/// Absolute tolerance for the expected-maximum quadrature (in units of `max|a_i|`).
pub const EMAX_ABS_TOL: f64 = 1e-8;
/// Residual tolerance for the Orlicz bisection.
pub const ORLICZ_RESIDUAL_TOL: f64 = 1e-10;
pub const ORLICZ_MAX_STEPS: usize = 200;

fn check_finite(a: &[f64]) -> Result<()> {
    match a.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::Domain(format!("weight a[{k}] = {} is not finite", a[k]))),
        None => Ok(()),
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `γ_r = (E|g|^r)^{1/r} = √2 · (Γ((r+1)/2) / Γ(1/2))^{1/r}`.
pub fn gamma_r(r: f64) -> Result<f64> {
    if !r.is_finite() || r < 1.0 {
        return Err(Error::Exponent(r, "gamma_r needs a finite r >= 1"));
    }
    let log_ratio = lgamma(0.5 * (r + 1.0)) - lgamma(0.5);
    Ok(SQRT_2 * (log_ratio / r).exp())
}

/// `(|a_i|)` sorted descending.
pub fn decreasing_rearrangement(a: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = a.iter().map(|x| x.abs()).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// `E max_i |a_i g_i| = ∫_0^∞ [1 − Π_{a_i≠0} (2Φ(t/|a_i|) − 1)] dt`.
///
/// The product is accumulated in log space as `Σ ln(1 − erfc(t/(|a_i|√2)))`
/// and equal weights are grouped, so long or constant vectors cost nothing
/// extra. Weights are normalized by `max|a_i|` first; the integral is cut at
/// `√(2 ln(4k) + 60)` (k nonzero weights) where the integrand is below `1e-12`.
pub fn expected_max_abs(a: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Empty);
    }
    check_finite(a)?;
    let sorted = decreasing_rearrangement(a);
    let amax = sorted[0];
    if amax == 0.0 {
        return Ok(0.0);
    }
    // (normalized weight, multiplicity), zeros dropped
    let mut groups: Vec<(f64, f64)> = Vec::new();
    for &w in sorted.iter().take_while(|&&w| w > 0.0) {
        let b = w / amax;
        match groups.last_mut() {
            Some((v, c)) if *v == b => *c += 1.0,
            _ => groups.push((b, 1.0)),
        }
    }
    let count: f64 = groups.iter().map(|g| g.1).sum();
    let t_max = (2.0 * (4.0 * count).ln() + 60.0).sqrt();
    let integrand = |t: f64| {
        let log_prod: f64 = groups.iter().map(|&(b, c)| c * (-erfc(t / (b * SQRT_2))).ln_1p()).sum();
        -log_prod.exp_m1()
    };
    let (v, _) = integrate(integrand, 0.0, t_max, EMAX_ABS_TOL);
    Ok(amax * v)
}

/// `max_i √(ln(i+3)) · a*_i` with `i` 1-based over the decreasing rearrangement.
pub fn maxgaus_comparator(a: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Empty);
    }
    check_finite(a)?;
    Ok(decreasing_rearrangement(a)
        .iter()
        .enumerate()
        .map(|(k, &w)| ((k + 4) as f64).ln().sqrt() * w)
        .fold(0.0, f64::max))
}

/// `M_g(s) = √(2/π) ∫_0^s exp(−1/(2t²)) dt`.
///
/// Integrating by parts gives `M_g(s) = √(2/π)·s·exp(−1/(2s²)) − erfc(1/(s√2))`,
/// used for `s > 0.5`. For smaller `s` the two terms cancel; there, with
/// `u = 1/s` and `φ` the standard normal density, the equivalent
/// `M_g(s) = 2φ(u)·T / (u(u + T))`, `T = 1/(u + 2/(u + 3/(u + …)))`,
/// is evaluated from the Mills-ratio continued fraction without cancellation.
pub fn orlicz_mg(s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!("M_g needs s >= 0, got {s}")));
    }
    Ok(mg(s))
}

const MG_CF_CUTOFF: f64 = 0.5;
const MG_CF_DEPTH: usize = 200;

fn mg(s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    if s.is_infinite() {
        return f64::INFINITY;
    }
    if s > MG_CF_CUTOFF {
        mg_closed(s)
    } else {
        mg_cf(s)
    }
}

fn mg_closed(s: f64) -> f64 {
    FRAC_2_PI.sqrt() * s * (-0.5 / (s * s)).exp() - erfc(1.0 / (s * SQRT_2))
}

fn mg_cf(s: f64) -> f64 {
    let u = 1.0 / s;
    let mut t = 0.0;
    for k in (2..=MG_CF_DEPTH).rev() {
        t = k as f64 / (u + t);
    }
    let t = 1.0 / (u + t);
    let two_phi = FRAC_2_PI.sqrt() * (-0.5 * u * u).exp();
    two_phi * t / (u * (u + t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrliczEval {
    pub value: f64,
    /// `|Σ M_g(|a_i| / value) − 1|`; zero for the zero vector.
    pub residual: f64,
    pub bisection_steps: usize,
}

/// Luxemburg norm `inf{ρ > 0 : Σ M_g(|a_i|/ρ) ≤ 1}` by bisection in `log ρ`.
///
/// The bracket is `[max|a|·10⁻³, max|a|·max(k, 2)]` with `k` nonzero weights:
/// `M_g(1000) > 1` at the low end, and `M_g(s) ≤ √(2/π)s` bounds the sum
/// below 1 at the high end.
pub fn orlicz_norm(a: &[f64]) -> Result<OrliczEval> {
    check_finite(a)?;
    let w: Vec<f64> = a.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
    if w.is_empty() {
        return Ok(OrliczEval { value: 0.0, residual: 0.0, bisection_steps: 0 });
    }
    let amax = w.iter().cloned().fold(0.0, f64::max);
    let sum_at = |rho: f64| w.iter().map(|&x| mg(x / rho)).sum::<f64>();

    let mut lo = amax * 1e-3;
    let mut hi = amax * (w.len().max(2) as f64);
    let mut steps = 0;
    let mut value = hi;
    let mut residual = (sum_at(hi) - 1.0).abs();
    while steps < ORLICZ_MAX_STEPS {
        steps += 1;
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        let f = sum_at(mid);
        if f > 1.0 {
            lo = mid;
        } else {
            hi = mid;
            value = mid;
            residual = (f - 1.0).abs();
        }
        if residual <= ORLICZ_RESIDUAL_TOL && hi / lo - 1.0 < 1e-14 {
            break;
        }
    }
    Ok(OrliczEval { value, residual, bisection_steps: steps })
}

/// `2·exp(−t² / (2 max_j |a_j|²))`, the tail bound for `|‖X‖_p − E‖X‖_p|`.
/// `p` only labels the call: the bound does not depend on it.
pub fn concentration_tail(a: &[f64], _p: f64, t: f64) -> Result<f64> {
    check_finite(a)?;
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("tail level t must be positive, got {t}")));
    }
    let sigma = a.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    if sigma == 0.0 {
        return Err(Error::Domain("concentration tail undefined for an all-zero weight vector".into()));
    }
    Ok(2.0 * (-(t * t) / (2.0 * sigma * sigma)).exp())
}

/// `γ_p · ‖a‖_p ≥ E‖(a_j g_j)‖_p`.
pub fn expected_lp_upper(a: &[f64], p: f64) -> Result<f64> {
    check_finite(a)?;
    if p.is_infinite() {
        return Err(Error::Exponent(p, "use expected_max_abs for p = inf"));
    }
    Ok(gamma_r(p)? * lp_norm(a, p))
}
