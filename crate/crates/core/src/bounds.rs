//! Right-hand sides of the operator-norm bounds, each as a named term breakdown.
//!
//! Unknown absolute constants are explicit parameters (pass `1.0` to get the
//! bare shape of a bound). The geometric constants are pinned:
//! `λ⁻² = p*(p*−1)/8` for the power-type-2 convexity of ℓ_{p*} and
//! `T₂(ℓ_p) = √p` for the type-2 constant.

use crate::csvfmt;
use crate::error::{Error, Result};
use crate::gaussian::{expected_max_abs, gamma_r};
use crate::matrix::lp_norm;
use crate::pqnorm::{best_of_starts, random_sphere_point, SphereObjective};
use crate::profiles::{NormPair, VarianceProfile};

/// How a breakdown's total is assembled from its terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combination {
    /// `Σ terms`.
    Sum,
    /// `C · Σ terms`, `C` taken from the constants list.
    ScaledSum,
    /// `terms[2] · (terms[0] + terms[1]) + terms[3]`.
    PrefactorBracketPlus,
}

#[derive(Clone, Debug)]
pub struct BoundBreakdown {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub constants: Vec<(String, f64)>,
    pub combination: Combination,
    pub total: f64,
    /// Degenerate-case flags, e.g. a vanishing `log` factor.
    pub notes: Vec<String>,
}

impl BoundBreakdown {
    fn build(
        name: &str,
        terms: Vec<(&str, f64)>,
        constants: Vec<(&str, f64)>,
        combination: Combination,
    ) -> Self {
        let mut b = Self {
            name: name.to_string(),
            terms: terms.into_iter().map(|(l, v)| (l.to_string(), v)).collect(),
            constants: constants.into_iter().map(|(l, v)| (l.to_string(), v)).collect(),
            combination,
            total: 0.0,
            notes: Vec::new(),
        };
        debug_assert!(b.terms.iter().all(|t| t.1 >= 0.0), "negative term in {name}");
        b.total = b.recompute();
        b
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.0 == label).map(|t| t.1)
    }

    pub fn constant(&self, symbol: &str) -> Option<f64> {
        self.constants.iter().find(|t| t.0 == symbol).map(|t| t.1)
    }

    /// Re-derives the total from `terms` and `constants`.
    pub fn recompute(&self) -> f64 {
        let t: Vec<f64> = self.terms.iter().map(|t| t.1).collect();
        match self.combination {
            Combination::Sum => t.iter().sum(),
            Combination::ScaledSum => self.constant("C").unwrap_or(1.0) * t.iter().sum::<f64>(),
            Combination::PrefactorBracketPlus => t[2] * (t[0] + t[1]) + t[3],
        }
    }

    /// `bound_name,term_label,value` rows followed by a `total` row (no header).
    pub fn csv_rows(&self) -> String {
        let name = csvfmt::field(&self.name);
        let mut s = String::new();
        for (label, v) in &self.terms {
            s.push_str(&format!("{name},{},{}\n", csvfmt::field(label), csvfmt::float(*v)));
        }
        s.push_str(&format!("{name},total,{}\n", csvfmt::float(self.total)));
        s
    }

    pub fn to_csv(&self) -> String {
        format!("bound_name,term_label,value\n{}", self.csv_rows())
    }
}

/// `λ⁴ = (8 / (p*(p*−1)))²`.
pub fn lambda_fourth(p_star: f64) -> Result<f64> {
    let inv_sq = p_star * (p_star - 1.0) / 8.0;
    if inv_sq <= 0.0 {
        return Err(Error::Domain(format!("lambda undefined at p* = {p_star}")));
    }
    Ok((1.0 / inv_sq).powi(2))
}

/// `T₂(ℓ_p) = √p`.
pub fn type2_constant(p: f64) -> f64 {
    p.sqrt()
}

fn finite_q(q: f64) -> Result<()> {
    if !q.is_finite() || q < 2.0 {
        return Err(Error::Exponent(q, "need 2 <= q < inf"));
    }
    Ok(())
}

fn theorem_range(pair: NormPair) -> Result<()> {
    if !pair.in_theorem_range() {
        return Err(Error::Pair { p_star: pair.p_star(), q: pair.q() });
    }
    Ok(())
}

/// `σ = γ_q · m^{−1/q} · max_j ‖(a_ij)_i‖_q`.
pub fn sigma_lemma31(profile: &VarianceProfile, q: f64) -> Result<f64> {
    finite_q(q)?;
    Ok(gamma_r(q)? * (profile.m() as f64).powf(-1.0 / q) * profile.col_norm_max(q)?)
}

/// `(γ_q^q / m · Σ_i (Σ_j a_ij² y_j²)^{q/2})^{1/q}`, the quantity whose
/// supremum over the ℓ_{p*} ball is `σ`.
pub fn sigma_objective(profile: &VarianceProfile, q: f64, y: &[f64]) -> Result<f64> {
    finite_q(q)?;
    let g = VarianceObjective::new(profile, q).value(y);
    Ok(gamma_r(q)? * (profile.m() as f64).powf(-1.0 / q) * g)
}

/// `y ↦ (Σ_i r_i^{q/2})^{1/q}` with `r_i = Σ_j a_ij² y_j²`. Convex in `y`.
struct VarianceObjective {
    sq: Vec<Vec<f64>>,
    q: f64,
    r: Vec<f64>,
}

impl VarianceObjective {
    fn new(profile: &VarianceProfile, q: f64) -> Self {
        let sq = (0..profile.m()).map(|i| profile.matrix().row(i).iter().map(|a| a * a).collect()).collect();
        Self { sq, q, r: vec![0.0; profile.m()] }
    }

    fn value(&mut self, y: &[f64]) -> f64 {
        for (ri, row) in self.r.iter_mut().zip(&self.sq) {
            *ri = row.iter().zip(y).map(|(a, v)| a * v * v).sum();
        }
        lp_norm(&self.r, self.q / 2.0).sqrt()
    }
}

impl SphereObjective for VarianceObjective {
    fn dim(&self) -> usize {
        self.sq[0].len()
    }

    fn eval(&mut self, y: &[f64], grad: &mut [f64]) -> f64 {
        let v = self.value(y);
        let rmax = self.r.iter().cloned().fold(0.0, f64::max);
        grad.iter_mut().for_each(|g| *g = 0.0);
        if rmax == 0.0 {
            return v;
        }
        // ∂/∂y_j Σ_i r_i^{q/2} ∝ y_j Σ_i a_ij² (r_i / rmax)^{q/2 − 1}
        let e = self.q / 2.0 - 1.0;
        for (row, &ri) in self.sq.iter().zip(&self.r) {
            let w = if e == 0.0 { 1.0 } else { (ri / rmax).powf(e) };
            if w == 0.0 {
                continue;
            }
            for ((g, a), yj) in grad.iter_mut().zip(row).zip(y) {
                *g += w * a * yj;
            }
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct VariationalOptions {
    /// Random starts added after the `n` unit vectors.
    pub random_starts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        Self { random_starts: 64, tol: 1e-12, max_iter: 500, seed: 0 }
    }
}

/// Maximizes [`sigma_objective`] over the ℓ_{p*} unit ball numerically, with
/// the unit vectors `e_j` and seeded random points as starts. Used to check
/// the closed form [`sigma_lemma31`].
pub fn sigma_variational(
    profile: &VarianceProfile,
    q: f64,
    p_star: f64,
    opts: &VariationalOptions,
) -> Result<f64> {
    NormPair::new(p_star, q)?;
    finite_q(q)?;
    if profile.is_zero() {
        return Ok(0.0);
    }
    let n = profile.n();
    let mut starts: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    starts.extend((0..opts.random_starts).map(|k| random_sphere_point(n, p_star, opts.seed, (n + k) as u64)));
    let mut obj = VarianceObjective::new(profile, q);
    let run = best_of_starts(&mut obj, p_star, starts, opts.tol, opts.max_iter, opts.seed);
    Ok(gamma_r(q)? * (profile.m() as f64).powf(-1.0 / q) * run.value)
}

/// `C · λ⁴ · T₂ · √(ln m / m) · √(emax_moment)` for a real row count `m`.
pub fn thm21_b_value(m: f64, pair: NormPair, c: f64, emax_moment: f64) -> Result<f64> {
    if m < 2.0 {
        return Err(Error::Domain(format!("need m >= 2 so that log m > 0, got {m}")));
    }
    if emax_moment < 0.0 {
        return Err(Error::Domain(format!("moment must be >= 0, got {emax_moment}")));
    }
    let l4 = lambda_fourth(pair.p_star())?;
    Ok(c * l4 * type2_constant(pair.p()) * (m.ln() / m).sqrt() * emax_moment.sqrt())
}

/// `B` of the empirical-process bound, where `emax_moment` estimates
/// `E max_i ‖X_i‖_p^q`.
pub fn thm21_b(profile: &VarianceProfile, pair: NormPair, c: f64, emax_moment: f64) -> Result<f64> {
    thm21_b_value(profile.m() as f64, pair, c, emax_moment)
}

/// `2 γ_p max_i ‖(a_ij)_j‖_p + C γ_q E max_ij |a_ij g_ij|`.
pub fn lemma32_rhs(profile: &VarianceProfile, pair: NormPair, c: f64) -> Result<BoundBreakdown> {
    theorem_range(pair)?;
    let (gp, gq) = (gamma_r(pair.p())?, gamma_r(pair.q())?);
    let emax = expected_max_abs(profile.entries())?;
    Ok(BoundBreakdown::build(
        "lemma32",
        vec![("2*gamma_p*rowmax_p", 2.0 * gp * profile.row_norm_max(pair.p())?), ("C*gamma_q*emax", c * gq * emax)],
        vec![("C", c), ("gamma_p", gp), ("gamma_q", gq)],
        Combination::Sum,
    ))
}

/// `C p^{5/q} (ln m)^{1/q} [γ_p max_i ‖row_i‖_p + γ_q E max|a_ij g_ij|] + 2^{1/q} γ_q max_j ‖col_j‖_q`.
pub fn theorem_main_rhs(profile: &VarianceProfile, pair: NormPair, c: f64) -> Result<BoundBreakdown> {
    theorem_range(pair)?;
    let m = profile.m();
    if m < 2 {
        return Err(Error::Domain("main bound needs m >= 2 (the (log m)^{1/q} factor vanishes at m = 1)".into()));
    }
    let (p, q) = (pair.p(), pair.q());
    let (gp, gq) = (gamma_r(p)?, gamma_r(q)?);
    let emax = expected_max_abs(profile.entries())?;
    let prefactor = c * p.powf(5.0 / q) * (m as f64).ln().powf(1.0 / q);
    Ok(BoundBreakdown::build(
        "theorem_main",
        vec![
            ("gamma_p*rowmax_p", gp * profile.row_norm_max(p)?),
            ("gamma_q*emax", gq * emax),
            ("prefactor", prefactor),
            ("2^(1/q)*gamma_q*colmax_q", 2f64.powf(1.0 / q) * gq * profile.col_norm_max(q)?),
        ],
        vec![("C", c), ("gamma_p", gp), ("gamma_q", gq)],
        Combination::PrefactorBracketPlus,
    ))
}

/// `max_i ‖row_i‖_p + max_j ‖col_j‖_q + E max|a_ij g_ij|`; valid on the closed range.
pub fn conjecture_functional(profile: &VarianceProfile, pair: NormPair) -> Result<BoundBreakdown> {
    Ok(BoundBreakdown::build(
        "conjecture",
        vec![
            ("rowmax_p", profile.row_norm_max(pair.p())?),
            ("colmax_q", profile.col_norm_max(pair.q())?),
            ("emax", expected_max_abs(profile.entries())?),
        ],
        vec![],
        Combination::Sum,
    ))
}

/// `‖y‖_q ‖x‖_∞ + ‖y‖_∞ ‖x‖_p` for the tensor profile `a_ij = x_j y_i`.
pub fn chevet_rhs(x: &[f64], y: &[f64], pair: NormPair) -> Result<BoundBreakdown> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty);
    }
    let inf = f64::INFINITY;
    Ok(BoundBreakdown::build(
        "chevet",
        vec![
            ("|y|_q*|x|_inf", lp_norm(y, pair.q()) * lp_norm(x, inf)),
            ("|y|_inf*|x|_p", lp_norm(y, inf) * lp_norm(x, pair.p())),
        ],
        vec![],
        Combination::Sum,
    ))
}

/// `C (|||A||| + √(ln max(m,n)) · max|a_ij|)`, the spectral-norm baseline.
pub fn bvh_rhs(profile: &VarianceProfile, c: f64) -> Result<BoundBreakdown> {
    let dim = profile.m().max(profile.n());
    let mut b = BoundBreakdown::build(
        "bvh",
        vec![
            ("mixed_row_col_l2", profile.bvh_mixed_norm()),
            ("sqrt_log_dim*max_entry", (dim as f64).ln().sqrt() * profile.max_entry()),
        ],
        vec![("C", c)],
        Combination::ScaledSum,
    );
    if dim == 1 {
        b.notes.push("max(m,n) = 1: log term is zero".into());
    }
    Ok(b)
}
