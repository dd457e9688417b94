//! Operator norms `‖M : ℓ_{p*} → ℓ_q‖ = sup_{‖y‖_{p*} ≤ 1} ‖My‖_q`.
//!
//! Closed forms cover `p* = 1` (best column), `q = ∞` (best row in the dual
//! norm) and `(2, 2)` (top singular value, by power iteration on `MᵀM`).
//! Everything else goes through a nonlinear power iteration with restarts.
//! Outside the closed-form routes the returned value is a witnessed lower
//! bound: it is attained by the returned maximizer, but global optimality is
//! not certified.

use crate::error::{Error, Result};
use crate::matrix::{conjugate, lp_norm, pow_abs, Matrix};
use crate::profiles::NormPair;
use crate::sampling::{KeyedStream, SampleKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ExactP1,
    ExactQInf,
    Exact22,
    PowerIteration,
    GridOracle,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ExactP1 => "exact-p1",
            Method::ExactQInf => "exact-qinf",
            Method::Exact22 => "exact-22",
            Method::PowerIteration => "power-iteration",
            Method::GridOracle => "grid-oracle",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormResult {
    pub value: f64,
    /// Witness `y` on the unit sphere of ℓ_{p*}.
    pub maximizer: Vec<f64>,
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
}

/// Knobs for the iterative routes.
#[derive(Clone, Debug)]
pub struct PowerOptions {
    /// Number of starting points; `None` picks `max(16, 4·⌈log₂(mn)⌉)`.
    pub restarts: Option<usize>,
    /// Stop when the relative objective gain drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for the random starting points.
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { restarts: None, tol: 1e-10, max_iter: 500, seed: 0 }
    }
}

pub fn default_restarts(m: usize, n: usize) -> usize {
    let bits = ((m * n) as f64).log2().ceil().max(0.0) as usize;
    16.max(4 * bits)
}

/// Tolerance and cap for the `(2, 2)` route.
pub const EXACT22_TOL: f64 = 1e-12;
pub const EXACT22_MAX_ITER: usize = 10_000;

const START_STREAM_TAG: u64 = 0x5354_4152_5453_0001;
const MONOTONE_SLACK: f64 = 1e-12;

fn check_finite(m: &Matrix) -> Result<()> {
    for i in 0..m.rows() {
        for (j, &v) in m.row(i).iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

/// Dispatches to the closed forms where they exist and to
/// [`power_iteration`] otherwise.
pub fn op_norm(m: &Matrix, pair: NormPair, opts: &PowerOptions) -> Result<NormResult> {
    check_finite(m)?;
    let (ps, q) = (pair.p_star(), pair.q());
    if ps == 1.0 {
        Ok(exact_p1(m, q))
    } else if q.is_infinite() {
        Ok(exact_qinf(m, ps))
    } else if ps == 2.0 && q == 2.0 {
        Ok(exact_22(m))
    } else {
        power_iteration(m, pair, opts)
    }
}

fn unit(n: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[j] = 1.0;
    e
}

/// Index of the largest value, lowest index on ties.
fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values.enumerate().fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best })
}

/// Column maximizing `‖M e_j‖_q`.
fn best_column(m: &Matrix, q: f64) -> (usize, f64) {
    argmax((0..m.cols()).map(|j| lp_norm(&m.column(j), q)))
}

/// `p* = 1`: the extreme points of the ℓ₁ ball are `±e_j`.
pub fn exact_p1(m: &Matrix, q: f64) -> NormResult {
    let (j, value) = best_column(m, q);
    NormResult { value, maximizer: unit(m.cols(), j), method: Method::ExactP1, converged: true, iterations: 0 }
}

/// `q = ∞`: `‖My‖_∞ = max_i ⟨row_i, y⟩`, maximized by the norming vector of the best row.
pub fn exact_qinf(m: &Matrix, p_star: f64) -> NormResult {
    let p = conjugate(p_star);
    let (i, analytic) = argmax((0..m.rows()).map(|i| lp_norm(m.row(i), p)));
    let maximizer = norming_vector(m.row(i), p_star).unwrap_or_else(|| unit(m.cols(), 0));
    let witnessed = lp_norm(&m.mul_vec(&maximizer), f64::INFINITY);
    NormResult {
        value: analytic.max(witnessed),
        maximizer,
        method: Method::ExactQInf,
        converged: true,
        iterations: 0,
    }
}

/// Largest singular value via power iteration on `y ↦ Mᵀ(My)`.
pub fn exact_22(m: &Matrix) -> NormResult {
    let (y, iterations, converged) = gram_power(m, EXACT22_TOL, EXACT22_MAX_ITER);
    let value = lp_norm(&m.mul_vec(&y), 2.0);
    NormResult { value, maximizer: y, method: Method::Exact22, converged, iterations }
}

/// Power iteration on the Gram map. Returns a unit ℓ₂ vector, the iteration
/// count, and whether the singular value estimate settled within `tol`.
fn gram_power(m: &Matrix, tol: f64, max_iter: usize) -> (Vec<f64>, usize, bool) {
    let n = m.cols();
    if m.is_zero() {
        return (unit(n, 0), 0, true);
    }
    // column norms plus a small fixed perturbation so the start is never
    // orthogonal to the top singular direction by construction
    let mut jitter = KeyedStream::new(SampleKey::new(START_STREAM_TAG, u64::MAX));
    let mut y: Vec<f64> =
        (0..n).map(|j| lp_norm(&m.column(j), 2.0) * (1.0 + 1e-3 * jitter.next_normal())).collect();
    normalize_l2(&mut y);

    let mut z = vec![0.0; m.rows()];
    let mut w = vec![0.0; n];
    m.mul_vec_into(&y, &mut z);
    let mut sigma = lp_norm(&z, 2.0);
    for it in 1..=max_iter {
        m.tmul_vec_into(&z, &mut w);
        if normalize_l2(&mut w) == 0.0 {
            return (y, it, true);
        }
        std::mem::swap(&mut y, &mut w);
        m.mul_vec_into(&y, &mut z);
        let next = lp_norm(&z, 2.0);
        let settled = (next - sigma).abs() <= tol * next;
        sigma = next;
        if settled {
            return (y, it, true);
        }
    }
    (y, max_iter, false)
}

fn normalize_l2(v: &mut [f64]) -> f64 {
    let nrm = lp_norm(v, 2.0);
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Scales `v` to unit ℓ_r norm; returns the original norm.
pub(crate) fn normalize_lp(v: &mut [f64], r: f64) -> f64 {
    let nrm = lp_norm(v, r);
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// `sign(z_i)·|z_i / max|z||^e`; all zeros if `z = 0`.
fn signed_power_into(z: &[f64], e: f64, out: &mut [f64]) {
    let zmax = z.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    if zmax == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    for (o, &v) in out.iter_mut().zip(z) {
        *o = pow_abs(v / zmax, e).copysign(v);
    }
}

/// Unit ℓ_{p*} vector maximizing `⟨w, y⟩`, i.e. `sign(w_j)|w_j|^{p-1}` normalized.
/// For `p* = 1` this is a signed unit vector at the first max-magnitude entry.
/// Returns `None` when `w = 0`.
pub fn norming_vector(w: &[f64], p_star: f64) -> Option<Vec<f64>> {
    let (j, wmax) = argmax(w.iter().map(|v| v.abs()));
    if wmax <= 0.0 {
        return None;
    }
    if p_star == 1.0 {
        let mut e = vec![0.0; w.len()];
        e[j] = 1.0f64.copysign(w[j]);
        return Some(e);
    }
    let mut y = vec![0.0; w.len()];
    signed_power_into(w, conjugate(p_star) - 1.0, &mut y);
    normalize_lp(&mut y, p_star);
    Some(y)
}

/// A convex objective maximized over the ℓ_{p*} unit sphere by the
/// dual-map ascent `y ← norming_vector(∇f(y))`.
///
/// For convex `f`, `f(y') ≥ f(y) + ⟨∇f(y), y' − y⟩ ≥ f(y)`, so the objective
/// never decreases. `eval` returns `f(y)` and writes any positive multiple of
/// the gradient into `grad`.
pub(crate) trait SphereObjective {
    fn dim(&self) -> usize;
    fn eval(&mut self, y: &[f64], grad: &mut [f64]) -> f64;
}

pub(crate) struct AscentRun {
    pub value: f64,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs the dual-map ascent from `start` (already on the unit sphere).
pub(crate) fn ascend<O: SphereObjective>(
    obj: &mut O,
    p_star: f64,
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
    perturb: SampleKey,
) -> AscentRun {
    let n = obj.dim();
    let mut y = start;
    let mut grad = vec![0.0; n];
    let mut grad_next = vec![0.0; n];
    let mut value = obj.eval(&y, &mut grad);
    let mut perturbations = 0u64;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let Some(y_next) = norming_vector(&grad, p_star) else {
            // zero gradient: either a zero objective everywhere or a bad start
            if value == 0.0 && perturbations < 3 {
                let mut s = KeyedStream::new(SampleKey::new(perturb.seed, perturb.index ^ (perturbations + 1)));
                perturbations += 1;
                let mut yp: Vec<f64> = y.iter().map(|v| v + 0.5 * s.next_normal()).collect();
                if normalize_lp(&mut yp, p_star) > 0.0 {
                    y = yp;
                    value = obj.eval(&y, &mut grad);
                }
                continue;
            }
            converged = true;
            break;
        };
        let next = obj.eval(&y_next, &mut grad_next);
        debug_assert!(
            next >= value - MONOTONE_SLACK * value.abs() - 1e-300,
            "ascent decreased the objective: {value} -> {next}"
        );
        if next < value {
            // rounding-level stall at a fixed point
            converged = true;
            break;
        }
        let gain = next - value;
        y = y_next;
        value = next;
        std::mem::swap(&mut grad, &mut grad_next);
        if gain <= tol * value {
            converged = true;
            break;
        }
    }
    AscentRun { value, y, iterations, converged }
}

/// Best run over `starts`; ties keep the lowest start index.
pub(crate) fn best_of_starts<O: SphereObjective>(
    obj: &mut O,
    p_star: f64,
    starts: Vec<Vec<f64>>,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> AscentRun {
    let mut best: Option<AscentRun> = None;
    for (k, s) in starts.into_iter().enumerate() {
        let run = ascend(obj, p_star, s, tol, max_iter, SampleKey::new(seed ^ START_STREAM_TAG, 1 << 32 | k as u64));
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    best.expect("at least one start")
}

/// Random point on the ℓ_{p*} sphere, keyed by `(seed, k)`.
pub(crate) fn random_sphere_point(n: usize, p_star: f64, seed: u64, k: u64) -> Vec<f64> {
    let mut s = KeyedStream::new(SampleKey::new(seed ^ START_STREAM_TAG, k));
    loop {
        let mut y: Vec<f64> = (0..n).map(|_| s.next_normal()).collect();
        if normalize_lp(&mut y, p_star) > 0.0 {
            return y;
        }
    }
}

struct OpNormObjective<'a> {
    m: &'a Matrix,
    q: f64,
    z: Vec<f64>,
    u: Vec<f64>,
}

impl SphereObjective for OpNormObjective<'_> {
    fn dim(&self) -> usize {
        self.m.cols()
    }

    fn eval(&mut self, y: &[f64], grad: &mut [f64]) -> f64 {
        self.m.mul_vec_into(y, &mut self.z);
        signed_power_into(&self.z, self.q - 1.0, &mut self.u);
        self.m.tmul_vec_into(&self.u, grad);
        lp_norm(&self.z, self.q)
    }
}

/// Nonlinear power iteration `y → My → dual_q → Mᵀ → dual_{p*}`.
///
/// Starting points, in order: the best `e_j`, the top right singular vector,
/// the norming vector of the best row in ℓ_p, then seeded random sphere points
/// up to the restart budget. Requires `1 < p* ≤ 2 ≤ q < ∞`.
pub fn power_iteration(m: &Matrix, pair: NormPair, opts: &PowerOptions) -> Result<NormResult> {
    let (ps, q) = (pair.p_star(), pair.q());
    if ps <= 1.0 || !q.is_finite() {
        return Err(Error::Pair { p_star: ps, q });
    }
    check_finite(m)?;
    let n = m.cols();
    if m.is_zero() {
        return Ok(NormResult {
            value: 0.0,
            maximizer: unit(n, 0),
            method: Method::PowerIteration,
            converged: true,
            iterations: 0,
        });
    }

    let restarts = opts.restarts.unwrap_or_else(|| default_restarts(m.rows(), n)).max(1);
    let mut starts = Vec::with_capacity(restarts);
    starts.push(unit(n, best_column(m, q).0));
    if restarts > 1 {
        let (mut v, _, _) = gram_power(m, 1e-9, 200);
        normalize_lp(&mut v, ps);
        starts.push(v);
    }
    if restarts > 2 {
        let (i, _) = argmax((0..m.rows()).map(|i| lp_norm(m.row(i), pair.p())));
        starts.push(norming_vector(m.row(i), ps).expect("nonzero matrix has a nonzero best row"));
    }
    for k in starts.len()..restarts {
        starts.push(random_sphere_point(n, ps, opts.seed, k as u64));
    }

    let mut obj = OpNormObjective { m, q, z: vec![0.0; m.rows()], u: vec![0.0; m.rows()] };
    let run = best_of_starts(&mut obj, ps, starts, opts.tol, opts.max_iter, opts.seed);
    // report the witnessed value of the returned maximizer
    let value = lp_norm(&m.mul_vec(&run.y), q);
    Ok(NormResult {
        value,
        maximizer: run.y,
        method: Method::PowerIteration,
        converged: run.converged,
        iterations: run.iterations,
    })
}

/// Brute-force scan of the ℓ_{p*} unit sphere for `n ≤ 3` columns.
///
/// `n = 2` walks `resolution + 1` angles of a quarter circle under both sign
/// patterns; `n = 3` walks a `(resolution + 1) × resolution` lattice of
/// polar/azimuth angles over the upper hemisphere. Negation symmetry of the
/// objective covers the rest. Meant as a test oracle.
pub fn grid_oracle(m: &Matrix, pair: NormPair, resolution: usize) -> Result<NormResult> {
    check_finite(m)?;
    let n = m.cols();
    if n > 3 {
        return Err(Error::Domain(format!("grid oracle supports at most 3 columns, got {n}")));
    }
    if resolution < 100 {
        return Err(Error::Domain(format!("grid resolution must be >= 100, got {resolution}")));
    }
    let (ps, q) = (pair.p_star(), pair.q());
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let mut z = vec![0.0; m.rows()];
    let mut consider = |mut y: Vec<f64>| {
        if normalize_lp(&mut y, ps) == 0.0 {
            return;
        }
        m.mul_vec_into(&y, &mut z);
        let v = lp_norm(&z, q);
        if v > best.0 {
            best = (v, y);
        }
    };

    use std::f64::consts::{FRAC_PI_2, PI};
    match n {
        1 => consider(vec![1.0]),
        2 => {
            for k in 0..=resolution {
                let t = FRAC_PI_2 * k as f64 / resolution as f64;
                let (s, c) = t.sin_cos();
                consider(vec![c, s]);
                consider(vec![c, -s]);
            }
        }
        _ => {
            for a in 0..=resolution {
                let phi = FRAC_PI_2 * a as f64 / resolution as f64;
                let (sp, cp) = phi.sin_cos();
                for b in 0..resolution {
                    let theta = 2.0 * PI * b as f64 / resolution as f64;
                    let (st, ct) = theta.sin_cos();
                    consider(vec![sp * ct, sp * st, cp]);
                }
            }
        }
    }
    Ok(NormResult { value: best.0, maximizer: best.1, method: Method::GridOracle, converged: true, iterations: 0 })
}
