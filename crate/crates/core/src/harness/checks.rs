//! The individual checks. Each one turns estimates and bounds into CSV text,
//! a ratio report and a list of failed assertions; nothing here touches the
//! file system.

use rayon::prelude::*;

use super::config::SweepConfig;
use super::report::{summary_csv, RatioReport, RatioRow, SkipRow};
use super::spec::{parse_weights, ProfileSpec};
use super::Baseline;
use crate::bounds::{chevet_rhs, conjecture_functional, sigma_lemma31, sigma_variational, theorem_main_rhs, VariationalOptions};
use crate::corpus::{comparator_corpus, sigma_corpus};
use crate::csvfmt::{field, float};
use crate::error::{Error, Result};
use crate::gaussian::{concentration_tail, expected_max_abs, maxgaus_comparator, orlicz_norm};
use crate::montecarlo::{empirical_tail, entry_max_samples, opnorm_samples, summarize, EstimateResult};
use crate::pqnorm::PowerOptions;
use crate::profiles::{NormPair, VarianceProfile};

/// Relative slack for `E‖G‖ ≤ (E‖G‖^q)^{1/q}`.
pub const CHAIN_SLACK: f64 = 1e-9;
/// Standard errors allowed between a Monte Carlo mean and an exact value.
pub const Z_LIMIT: f64 = 4.0;
/// Combined standard errors allowed above a regression baseline.
pub const BASELINE_SE: f64 = 3.0;
/// Relative tolerance for `‖diag(d_i g_i)‖ = max_i |d_i g_i|` per sample.
pub const DIAG_IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Cell {
    pub id: usize,
    pub spec: ProfileSpec,
    pub m: usize,
    pub n: usize,
    pub pair: NormPair,
}

impl Cell {
    fn skip(&self, check: &str, reason: &str) -> SkipRow {
        SkipRow {
            check: check.into(),
            cell_id: self.id,
            profile: self.spec.label(),
            m: self.m,
            n: self.n,
            pair: self.pair.label(),
            reason: reason.into(),
        }
    }

    fn ratio_row(&self, lhs: f64, lhs_se: f64, rhs: f64) -> RatioRow {
        RatioRow {
            cell_id: self.id,
            profile: self.spec.label(),
            group: self.pair.label(),
            dim: self.m.max(self.n),
            lhs,
            lhs_se,
            rhs,
        }
    }

    fn csv_prefix(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.id,
            field(&self.spec.label()),
            self.m,
            self.n,
            float(self.pair.p_star()),
            float(self.pair.q())
        )
    }
}

/// A cell with its profile and Monte Carlo operator-norm samples.
#[derive(Clone, Debug)]
pub struct CellRun {
    pub cell: Cell,
    pub profile: VarianceProfile,
    pub estimate: EstimateResult,
    pub samples: Vec<f64>,
}

/// Output of one check.
#[derive(Clone, Debug, Default)]
pub struct CheckOutput {
    pub name: String,
    pub report: Option<RatioReport>,
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    pub failures: Vec<String>,
    pub skipped: Vec<SkipRow>,
    pub notes: Vec<String>,
}

impl CheckOutput {
    fn new(name: &str) -> Self {
        Self { name: name.into(), ..Default::default() }
    }
}

/// Cells `profiles × dims × pairs`, in that nesting order.
pub fn sweep_cells(cfg: &SweepConfig) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for s in &cfg.profiles {
        let spec = ProfileSpec::parse(s)?;
        for &(m, n) in &cfg.dims {
            for &(ps, q) in &cfg.pairs {
                cells.push(Cell { id: cells.len(), spec: spec.clone(), m, n, pair: NormPair::new(ps, q)? });
            }
        }
    }
    Ok(cells)
}

/// Estimates every cell; cells run concurrently and come back in input order.
pub fn run_cells(cells: &[Cell], n_samples: usize, seed: u64) -> Result<Vec<CellRun>> {
    let opts = PowerOptions::default();
    cells
        .par_iter()
        .map(|cell| {
            let profile = cell.spec.build(cell.m, cell.n, seed)?;
            let samples = opnorm_samples(&profile, cell.pair, n_samples, seed, &opts)?;
            let estimate = summarize(&samples, Some(cell.pair.q()), seed)?;
            Ok(CellRun { cell: cell.clone(), profile, estimate, samples })
        })
        .collect()
}

pub fn check_theorem(cfg: &SweepConfig, runs: &[CellRun], baseline: Option<&Baseline>) -> Result<CheckOutput> {
    let mut out = CheckOutput::new("theorem");
    let mut report = RatioReport::new("theorem");
    let c = cfg.constant("theorem_main");
    let mut csv = String::from(
        "cell_id,profile,m,n,p_star,q,n_samples,lhs_mean,lhs_mean_se,lhs_qroot,lhs_qroot_se,\
         gamma_p_rowmax_p,gamma_q_emax,prefactor,colmax_term,rhs_total,ratio,ratio_ci_lo,ratio_ci_hi,chain_ok\n",
    );
    for run in runs {
        let cell = &run.cell;
        if !cell.pair.in_theorem_range() {
            out.skipped.push(cell.skip("theorem", "pair outside 1 < p* <= 2 <= q < inf"));
            continue;
        }
        if cell.m < 2 {
            out.skipped.push(cell.skip("theorem", "m < 2: log m vanishes"));
            continue;
        }
        let rhs = theorem_main_rhs(&run.profile, cell.pair, c)?;
        let e = &run.estimate;
        let (qroot, qse) = (e.q_moment_root.expect("finite q"), e.q_moment_std_err.expect("finite q"));
        let row = cell.ratio_row(qroot, qse, rhs.total);
        if rhs.total <= 0.0 {
            out.skipped.push(cell.skip("theorem", "right-hand side is zero (zero profile)"));
            report.push(row);
            continue;
        }
        let chain_ok = e.mean <= qroot + CHAIN_SLACK * (1.0 + e.mean);
        if !chain_ok {
            out.failures.push(format!("theorem cell {}: mean {} exceeds q-moment root {}", cell.id, e.mean, qroot));
        }
        let (lo, hi) = row.ci();
        csv += &format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            cell.csv_prefix(),
            e.n_samples,
            float(e.mean),
            float(e.std_err),
            float(qroot),
            float(qse),
            float(rhs.terms[0].1),
            float(rhs.terms[1].1),
            float(rhs.terms[2].1),
            float(rhs.terms[3].1),
            float(rhs.total),
            float(row.ratio()),
            float(lo),
            float(hi),
            chain_ok
        );
        report.push(row);
    }
    if let (Some(b), Some(s)) = (baseline, report.summary()) {
        let limit = b.theorem_max_ratio + BASELINE_SE * b.theorem_max_ratio_se.hypot(s.max_se);
        if s.max > limit {
            out.failures.push(format!("theorem max ratio {} exceeds baseline limit {limit}", s.max));
        }
    }
    out.files.push(("theorem_check.csv".into(), csv));
    out.files.push(("theorem_summary.csv".into(), summary_csv(&report)));
    out.report = Some(report);
    Ok(out)
}

pub fn check_conjecture(runs: &[CellRun]) -> Result<CheckOutput> {
    let mut out = CheckOutput::new("conjecture");
    let mut report = RatioReport::new("conjecture");
    let mut csv = String::from(
        "cell_id,profile,m,n,p_star,q,n_samples,lhs_mean,lhs_se,rowmax_p,colmax_q,emax,rhs_total,ratio,ratio_ci_lo,ratio_ci_hi\n",
    );
    for run in runs {
        let cell = &run.cell;
        let rhs = conjecture_functional(&run.profile, cell.pair)?;
        let e = &run.estimate;
        let row = cell.ratio_row(e.mean, e.std_err, rhs.total);
        if rhs.total <= 0.0 {
            out.skipped.push(cell.skip("conjecture", "functional is zero (zero profile)"));
            report.push(row);
            continue;
        }
        let r = row.ratio();
        if !(r > 0.0 && r.is_finite()) {
            out.failures.push(format!("conjecture cell {}: ratio {r} not in (0, inf)", cell.id));
        }
        let (lo, hi) = row.ci();
        csv += &format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            cell.csv_prefix(),
            e.n_samples,
            float(e.mean),
            float(e.std_err),
            float(rhs.terms[0].1),
            float(rhs.terms[1].1),
            float(rhs.terms[2].1),
            float(rhs.total),
            float(r),
            float(lo),
            float(hi)
        );
        report.push(row);
    }
    out.files.push(("conjecture_check.csv".into(), csv));
    out.files.push(("conjecture_summary.csv".into(), summary_csv(&report)));
    out.report = Some(report);
    Ok(out)
}

pub fn check_diagonal(runs: &[CellRun]) -> Result<CheckOutput> {
    let mut out = CheckOutput::new("diagonal");
    let mut report = RatioReport::new("diagonal");
    let mut csv = String::from(
        "cell_id,profile,m,n,p_star,q,n_samples,mc_mean,mc_se,emax_quadrature,maxgaus_comparator,orlicz_norm,\
         z_score,identity_max_rel_dev,ok\n",
    );
    for run in runs.iter().filter(|r| r.cell.spec.is_diagonal()) {
        let cell = &run.cell;
        let d: Vec<f64> = (0..cell.m.min(cell.n)).map(|i| run.profile.get(i, i)).collect();
        let emax = expected_max_abs(&d)?;
        let comparator = maxgaus_comparator(&d)?;
        let orlicz = orlicz_norm(&d)?.value;
        let e = &run.estimate;
        // same keys as the norm samples, so realizations match one to one
        let entry = entry_max_samples(&run.profile, e.n_samples, e.seed)?;
        let dev = run
            .samples
            .iter()
            .zip(&entry)
            .map(|(a, b)| if *b > 0.0 { (a - b).abs() / b } else { a.abs() })
            .fold(0.0, f64::max);
        if dev > DIAG_IDENTITY_TOL {
            out.notes.push(format!(
                "diagonal cell {}: operator norm differs from the entry max by {dev:e} (relative)",
                cell.id
            ));
        }
        let z = if e.std_err > 0.0 { (e.mean - emax) / e.std_err } else if e.mean == emax { 0.0 } else { f64::INFINITY };
        let ok = z.abs() <= Z_LIMIT;
        if !ok {
            out.failures.push(format!("diagonal cell {}: MC {} vs quadrature {emax} (z = {z})", cell.id, e.mean));
        }
        csv += &format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            cell.csv_prefix(),
            e.n_samples,
            float(e.mean),
            float(e.std_err),
            float(emax),
            float(comparator),
            float(orlicz),
            float(z),
            float(dev),
            ok
        );
        report.push(cell.ratio_row(e.mean, e.std_err, emax));
    }
    out.files.push(("diagonal_check.csv".into(), csv));
    out.report = Some(report);
    Ok(out)
}

/// Cells for the tensor study: `profiles × sizes × pairs`, all square.
pub fn chevet_cells(cfg: &SweepConfig) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for s in &cfg.chevet.profiles {
        let spec = ProfileSpec::parse(s)?;
        if spec.tensor_factors(1, 1).is_none() {
            return Err(Error::Domain(format!("chevet check needs tensor profiles, `{s}` is not one")));
        }
        for &n in &cfg.chevet.sizes {
            for &(ps, q) in &cfg.chevet.pairs {
                cells.push(Cell { id: cells.len(), spec: spec.clone(), m: n, n, pair: NormPair::new(ps, q)? });
            }
        }
    }
    Ok(cells)
}

pub fn check_chevet(cfg: &SweepConfig, runs: &[CellRun], baseline: Option<&Baseline>) -> Result<CheckOutput> {
    let mut out = CheckOutput::new("chevet");
    let mut report = RatioReport::new("chevet");
    let (blo, bhi) = cfg.chevet.bracket;
    let mut csv = String::from(
        "cell_id,profile,m,n,p_star,q,n_samples,lhs_mean,lhs_se,term_yq_xinf,term_yinf_xp,rhs_total,ratio,ratio_ci_lo,ratio_ci_hi,in_bracket\n",
    );
    for run in runs {
        let cell = &run.cell;
        let (x, y) = cell.spec.tensor_factors(cell.m, cell.n).expect("checked in chevet_cells");
        let rhs = chevet_rhs(&x, &y, cell.pair)?;
        let e = &run.estimate;
        let row = cell.ratio_row(e.mean, e.std_err, rhs.total);
        if rhs.total <= 0.0 {
            out.skipped.push(cell.skip("chevet", "right-hand side is zero (zero profile)"));
            report.push(row);
            continue;
        }
        let r = row.ratio();
        let inside = (blo..=bhi).contains(&r);
        if !inside {
            out.failures.push(format!("chevet cell {}: ratio {r} outside [{blo}, {bhi}]", cell.id));
        }
        let (lo, hi) = row.ci();
        csv += &format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            cell.csv_prefix(),
            e.n_samples,
            float(e.mean),
            float(e.std_err),
            float(rhs.terms[0].1),
            float(rhs.terms[1].1),
            float(rhs.total),
            float(r),
            float(lo),
            float(hi),
            inside
        );
        report.push(row);
    }
    if let (Some(b), Some(s)) = (baseline, report.summary()) {
        let lo = b.chevet_min_ratio - BASELINE_SE * b.chevet_min_ratio_se.hypot(s.min_se);
        let hi = b.chevet_max_ratio + BASELINE_SE * b.chevet_max_ratio_se.hypot(s.max_se);
        if s.min < lo || s.max > hi {
            out.failures.push(format!("chevet ratios [{}, {}] leave the recorded bracket [{lo}, {hi}]", s.min, s.max));
        }
    }
    out.files.push(("chevet_check.csv".into(), csv));
    out.files.push(("chevet_summary.csv".into(), summary_csv(&report)));
    out.report = Some(report);
    Ok(out)
}

/// One concentration case after estimation, for plotting.
#[derive(Clone, Debug)]
pub struct TailRows {
    pub case: usize,
    pub weights: String,
    pub p: f64,
    /// `(t, frequency, bound)`.
    pub points: Vec<(f64, f64, f64)>,
}

pub fn check_concentration(cfg: &SweepConfig) -> Result<(CheckOutput, Vec<TailRows>)> {
    let mut out = CheckOutput::new("concentration");
    let cc = &cfg.concentration;
    let mut csv = String::from("case,weights,p,t,center,frequency,wilson_half_width,bound,ok\n");
    let mut curves = Vec::new();
    for (k, case) in cc.cases.iter().enumerate() {
        let a = parse_weights(&case.weights)?;
        let est = empirical_tail(&a, case.p, cc.n_samples, cfg.seed, &cc.t_grid)?;
        let mut points = Vec::new();
        for (i, &t) in cc.t_grid.iter().enumerate() {
            let (f, hw) = (est.frequencies[i], est.half_widths[i]);
            let prefix = format!("{k},{},{},{},{}", field(&case.weights), float(case.p), float(t), float(est.center));
            if est.degenerate {
                csv += &format!("{prefix},{},{},,skipped\n", float(f), float(hw));
                continue;
            }
            let bound = concentration_tail(&a, case.p, t)?;
            let ok = f <= bound + hw;
            if !ok {
                out.failures.push(format!("concentration case {k} at t={t}: frequency {f} > bound {bound} + {hw}"));
            }
            csv += &format!("{prefix},{},{},{},{ok}\n", float(f), float(hw), float(bound));
            points.push((t, f, bound));
        }
        if est.degenerate {
            out.notes.push(format!("concentration case {k}: all weights zero, bound check skipped"));
        } else {
            curves.push(TailRows { case: k, weights: case.weights.clone(), p: case.p, points });
        }
    }
    out.files.push(("concentration_check.csv".into(), csv));
    Ok((out, curves))
}

/// Comparator brackets over the weight corpus and the variational identity
/// for `σ` over the profile corpus.
pub fn check_diagnostics(cfg: &SweepConfig) -> Result<CheckOutput> {
    let mut out = CheckOutput::new("diagnostics");
    let d = &cfg.diagnostics;
    let rows: Vec<(usize, f64, f64, f64)> = comparator_corpus(cfg.seed)
        .par_iter()
        .map(|a| Ok((a.len(), expected_max_abs(a)?, maxgaus_comparator(a)?, orlicz_norm(a)?.value)))
        .collect::<Result<_>>()?;
    let mut csv = String::from("index,len,emax,maxgaus_comparator,orlicz_norm,ratio_maxgaus,ratio_orlicz,ok\n");
    for (k, &(len, emax, mg, orl)) in rows.iter().enumerate() {
        let (r1, r2) = (emax / mg, emax / orl);
        let ok = (d.maxgaus_bracket.0..=d.maxgaus_bracket.1).contains(&r1)
            && (d.orlicz_bracket.0..=d.orlicz_bracket.1).contains(&r2);
        if !ok {
            out.failures.push(format!("comparator corpus vector {k}: ratios {r1}, {r2} outside brackets"));
        }
        csv += &format!("{k},{len},{},{},{},{},{},{ok}\n", float(emax), float(mg), float(orl), float(r1), float(r2));
    }
    let extremes = |f: &dyn Fn(&(usize, f64, f64, f64)) -> f64| {
        rows.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (a, b) = extremes(&|r| r.1 / r.2);
    let (c, e) = extremes(&|r| r.1 / r.3);
    out.notes.push(format!("E max / comparator in [{a:.4}, {b:.4}]; E max / Orlicz in [{c:.4}, {e:.4}]"));
    out.files.push(("comparators.csv".into(), csv));

    let opts = VariationalOptions { seed: cfg.seed, ..Default::default() };
    let sig: Vec<(f64, f64)> = sigma_corpus(cfg.seed)
        .par_iter()
        .map(|(p, pair)| Ok((sigma_lemma31(p, pair.q())?, sigma_variational(p, pair.q(), pair.p_star(), &opts)?)))
        .collect::<Result<_>>()?;
    let mut csv = String::from("index,m,n,p_star,q,sigma_closed_form,sigma_variational,rel_diff,ok\n");
    for (k, ((p, pair), &(closed, var))) in sigma_corpus(cfg.seed).iter().zip(&sig).enumerate() {
        let rel = if closed > 0.0 { (closed - var).abs() / closed } else { var.abs() };
        let ok = rel <= d.sigma_rel_tol;
        if !ok {
            out.failures.push(format!("sigma corpus profile {k}: closed form {closed} vs variational {var}"));
        }
        csv += &format!(
            "{k},{},{},{},{},{},{},{},{ok}\n",
            p.m(),
            p.n(),
            float(pair.p_star()),
            float(pair.q()),
            float(closed),
            float(var),
            float(rel)
        );
    }
    out.files.push(("sigma_identity.csv".into(), csv));
    Ok(out)
}
