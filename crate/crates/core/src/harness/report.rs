//! Ratio reports shared by the checks.

use serde::{Deserialize, Serialize};

use crate::csvfmt::{field, float};
use crate::montecarlo::Z95;

/// One cell of a bound-versus-estimate comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub cell_id: usize,
    pub profile: String,
    /// Plot group, typically the exponent pair.
    pub group: String,
    /// Plot abscissa, typically `max(m, n)`.
    pub dim: usize,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
}

impl RatioRow {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }

    pub fn ratio_se(&self) -> f64 {
        self.lhs_se / self.rhs
    }

    /// 95% interval for the ratio, treating `rhs` as exact.
    pub fn ci(&self) -> (f64, f64) {
        ((self.lhs - Z95 * self.lhs_se) / self.rhs, (self.lhs + Z95 * self.lhs_se) / self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub cells: usize,
    pub min: f64,
    pub max: f64,
    pub geomean: f64,
    /// Cell attaining the maximum (lowest id on ties) and its ratio std error.
    pub argmax_cell: usize,
    pub max_se: f64,
    pub argmin_cell: usize,
    pub min_se: f64,
}

/// Rows with `rhs > 0`; cells with a vanishing right-hand side live in `segregated`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatioReport {
    pub name: String,
    pub rows: Vec<RatioRow>,
    pub segregated: Vec<RatioRow>,
}

impl RatioReport {
    pub fn new(name: &str) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    /// Files `row` under `rows` or `segregated` depending on its `rhs`.
    pub fn push(&mut self, row: RatioRow) {
        if row.rhs > 0.0 {
            self.rows.push(row);
        } else {
            self.segregated.push(row);
        }
    }

    pub fn summary(&self) -> Option<RatioSummary> {
        summarize_rows(self.rows.iter())
    }

    /// Summaries per group, groups in first-appearance order.
    pub fn group_summaries(&self) -> Vec<(String, RatioSummary)> {
        let mut groups: Vec<String> = Vec::new();
        for r in &self.rows {
            if !groups.contains(&r.group) {
                groups.push(r.group.clone());
            }
        }
        groups
            .into_iter()
            .map(|g| {
                let s = summarize_rows(self.rows.iter().filter(|r| r.group == g)).expect("group is nonempty");
                (g, s)
            })
            .collect()
    }
}

/// Order-independent summary: extremes break ties by cell id and the log-sum
/// is accumulated over sorted values.
pub fn summarize_rows<'a>(rows: impl Iterator<Item = &'a RatioRow>) -> Option<RatioSummary> {
    let mut rows: Vec<&RatioRow> = rows.collect();
    if rows.is_empty() {
        return None;
    }
    rows.sort_by_key(|r| r.cell_id);
    let by_max = rows.iter().fold(rows[0], |b, r| if r.ratio() > b.ratio() { r } else { b });
    let by_min = rows.iter().fold(rows[0], |b, r| if r.ratio() < b.ratio() { r } else { b });
    let mut logs: Vec<f64> = rows.iter().map(|r| r.ratio().ln()).collect();
    logs.sort_by(f64::total_cmp);
    let geomean = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    Some(RatioSummary {
        cells: rows.len(),
        min: by_min.ratio(),
        max: by_max.ratio(),
        geomean,
        argmax_cell: by_max.cell_id,
        max_se: by_max.ratio_se(),
        argmin_cell: by_min.cell_id,
        min_se: by_min.ratio_se(),
    })
}

/// A cell a check did not evaluate, with the reason.
#[derive(Clone, Debug, PartialEq)]
pub struct SkipRow {
    pub check: String,
    pub cell_id: usize,
    pub profile: String,
    pub m: usize,
    pub n: usize,
    pub pair: String,
    pub reason: String,
}

pub fn skipped_csv(rows: &[SkipRow]) -> String {
    let mut s = String::from("check,cell_id,profile,m,n,pair,reason\n");
    for r in rows {
        s += &format!(
            "{},{},{},{},{},{},{}\n",
            r.check,
            r.cell_id,
            field(&r.profile),
            r.m,
            r.n,
            field(&r.pair),
            field(&r.reason)
        );
    }
    s
}

/// Per-group summary table.
pub fn summary_csv(report: &RatioReport) -> String {
    let mut s = String::from("group,cells,min_ratio,max_ratio,geomean_ratio,argmin_cell,argmax_cell\n");
    let mut push = |g: &str, r: &RatioSummary| {
        s += &format!(
            "{},{},{},{},{},{},{}\n",
            field(g),
            r.cells,
            float(r.min),
            float(r.max),
            float(r.geomean),
            r.argmin_cell,
            r.argmax_cell
        );
    };
    for (g, r) in report.group_summaries() {
        push(&g, &r);
    }
    if let Some(all) = report.summary() {
        push("all", &all);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: usize, lhs: f64, rhs: f64, g: &str) -> RatioRow {
        RatioRow { cell_id: id, profile: "iid:1".into(), group: g.into(), dim: 4, lhs, lhs_se: 0.1, rhs }
    }

    #[test]
    fn segregates_zero_rhs() {
        let mut r = RatioReport::new("t");
        r.push(row(0, 1.0, 2.0, "a"));
        r.push(row(1, 0.0, 0.0, "a"));
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.segregated.len(), 1);
        assert_eq!(r.summary().unwrap().max, 0.5);
    }

    #[test]
    fn summary_is_permutation_invariant() {
        let rows: Vec<RatioRow> = (0..7).map(|k| row(k, 1.0 + (k as f64 * 0.37).sin().abs(), 1.3, "a")).collect();
        let a = summarize_rows(rows.iter()).unwrap();
        let mut rev = rows.clone();
        rev.reverse();
        rev.swap(1, 4);
        assert_eq!(summarize_rows(rev.iter()).unwrap(), a);
        let direct = rows.iter().map(|r| r.ratio()).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(a.max, direct);
    }

    #[test]
    fn groups_and_csv() {
        let mut r = RatioReport::new("t");
        r.push(row(0, 1.0, 2.0, "p*=1.5,q=2"));
        r.push(row(1, 3.0, 2.0, "p*=2,q=2"));
        r.push(row(2, 2.0, 2.0, "p*=1.5,q=2"));
        let g = r.group_summaries();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].1.max, 1.0);
        let csv = summary_csv(&r);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.contains("\"p*=1.5,q=2\""));
        assert!(r.rows[0].ci().0 < 0.5 && r.rows[0].ci().1 > 0.5);
    }
}
