//! Plot-ready data files and minimal SVG scatter plots.
//!
//! Output depends only on the report contents, so bytes are reproducible.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::checks::TailRows;
use super::report::RatioReport;
use crate::error::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// File-name friendly form of a group label, e.g. `p*=1.5,q=2` → `p1.5_q2`.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .filter_map(|c| match c {
            '*' | '=' => None,
            ',' | ' ' | '/' | ':' => Some('_'),
            c => Some(c),
        })
        .collect()
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
    line: bool,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values
            .map(|v| if log { v.ln() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() || !hi.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad, log }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        let v = if self.log { v.ln() } else { v };
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }

    fn label(&self, at: f64) -> f64 {
        if self.log {
            at.exp()
        } else {
            at
        }
    }
}

fn svg(title: &str, xlabel: &str, ylabel: &str, series: &[Series], xlog: bool) -> String {
    let x = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), xlog);
    let y = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), false);
    let px = |v: f64| x.map(v, MARGIN, W - MARGIN);
    let py = |v: f64| y.map(v, H - MARGIN, MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for (k, frac) in [0.0, 0.5, 1.0].iter().enumerate() {
        let xv = x.lo + frac * (x.hi - x.lo);
        let yv = y.lo + frac * (y.hi - y.lo);
        let xp = MARGIN + frac * (W - 2.0 * MARGIN);
        let yp = H - MARGIN - frac * (H - 2.0 * MARGIN);
        let anchor = ["start", "middle", "end"][k];
        let _ = writeln!(s, r#"<text x="{xp:.2}" y="{:.2}" text-anchor="{anchor}">{:.3}</text>"#, H - MARGIN + 16.0, x.label(xv));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#, MARGIN - 6.0, yp + 4.0, y.label(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, esc(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(ylabel)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if ser.line && ser.points.len() > 1 {
            let pts: Vec<String> = ser.points.iter().map(|&(a, b)| format!("{:.2},{:.2}", px(a), py(b))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" points="{}"/>"#, pts.join(" "));
        }
        for &(a, b) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(a), py(b));
        }
        let ly = MARGIN + 14.0 * (k as f64 + 1.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}" fill="{color}" text-anchor="end">{}</text>"#, W - MARGIN - 6.0, esc(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One `.dat` file per group (`dim ratio` columns) and one SVG per report.
pub fn render_ratio_plots(report: &RatioReport) -> Result<Vec<(String, String)>> {
    if report.rows.is_empty() {
        return Err(Error::Domain(format!("report `{}` has no rows to plot", report.name)));
    }
    let mut files = Vec::new();
    let mut series = Vec::new();
    for (group, _) in report.group_summaries() {
        let mut pts: Vec<(f64, f64)> =
            report.rows.iter().filter(|r| r.group == group).map(|r| (r.dim as f64, r.ratio())).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut dat = format!("# {} {group}\n# dim ratio\n", report.name);
        for (d, r) in &pts {
            let _ = writeln!(dat, "{d} {}", crate::csvfmt::float(*r));
        }
        files.push((format!("{}_{}.dat", report.name, slug(&group)), dat));
        series.push(Series { name: group, points: pts, line: false });
    }
    let title = format!("{}: estimate / bound", report.name);
    files.push((format!("{}.svg", report.name), svg(&title, "max(m, n)", "ratio", &series, true)));
    Ok(files)
}

/// Per-case `t frequency bound` tables and one overlay plot.
pub fn render_tail_plots(curves: &[TailRows]) -> Result<Vec<(String, String)>> {
    if curves.is_empty() {
        return Err(Error::Domain("no concentration cases to plot".into()));
    }
    let mut files = Vec::new();
    let mut series = Vec::new();
    for c in curves {
        let mut dat = format!("# case {} weights {} p {}\n# t frequency bound\n", c.case, c.weights, c.p);
        for &(t, f, b) in &c.points {
            let _ = writeln!(dat, "{t} {} {}", crate::csvfmt::float(f), crate::csvfmt::float(b));
        }
        files.push((format!("concentration_case{}.dat", c.case), dat));
        series.push(Series { name: format!("case {}", c.case), points: c.points.iter().map(|p| (p.0, p.1)).collect(), line: true });
    }
    if let Some(c) = curves.first() {
        series.push(Series { name: "bound".into(), points: c.points.iter().map(|p| (p.0, p.2.min(1.0))).collect(), line: true });
    }
    files.push(("concentration.svg".into(), svg("tail frequency vs bound", "t", "P(|norm - mean| > t)", &series, false)));
    Ok(files)
}

/// Renders the report's plot files and writes them to `dir`. Nothing is
/// written if rendering fails.
pub fn emit_plots(report: &RatioReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = render_ratio_plots(report)?;
    std::fs::create_dir_all(dir)?;
    files
        .into_iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}
