//! Experiment engine: runs the selected checks for a [`SweepConfig`] and
//! collects every output file in memory, in a fixed order, before anything
//! is written. The same in-memory result backs the `--verify` mode.

pub mod checks;
pub mod config;
pub mod plots;
pub mod report;
pub mod spec;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use checks::{Cell, CellRun, CheckOutput};
pub use config::SweepConfig;
pub use report::{RatioReport, RatioRow, RatioSummary};
pub use spec::ProfileSpec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Theorem,
    Conjecture,
    Diagonal,
    Chevet,
    Concentration,
    Diagnostics,
}

impl Check {
    pub const ALL: [Check; 6] =
        [Check::Theorem, Check::Conjecture, Check::Diagonal, Check::Chevet, Check::Concentration, Check::Diagnostics];
}

/// Recorded regression values from a pinned run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub seed: u64,
    pub n_samples: usize,
    pub theorem_max_ratio: f64,
    pub theorem_max_ratio_se: f64,
    pub theorem_max_cell: usize,
    pub chevet_min_ratio: f64,
    pub chevet_min_ratio_se: f64,
    pub chevet_max_ratio: f64,
    pub chevet_max_ratio_se: f64,
}

impl Baseline {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Domain(format!("baseline {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("baseline serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    #[serde(flatten)]
    pub summary: RatioSummary,
}

/// Machine-readable digest of a run, written as `summary.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub n_samples: usize,
    pub failures: usize,
    pub skipped: usize,
    pub theorem: Option<RatioSummary>,
    pub diagonal: Option<RatioSummary>,
    pub chevet: Option<RatioSummary>,
    pub conjecture: Vec<GroupSummary>,
}

impl RunSummary {
    /// Baseline values, available when both the theorem and Chevet checks ran.
    pub fn baseline(&self) -> Option<Baseline> {
        let (t, c) = (self.theorem.as_ref()?, self.chevet.as_ref()?);
        Some(Baseline {
            seed: self.seed,
            n_samples: self.n_samples,
            theorem_max_ratio: t.max,
            theorem_max_ratio_se: t.max_se,
            theorem_max_cell: t.argmax_cell,
            chevet_min_ratio: c.min,
            chevet_min_ratio_se: c.min_se,
            chevet_max_ratio: c.max,
            chevet_max_ratio_se: c.max_se,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub summary: RunSummary,
    pub reports: Vec<RatioReport>,
    /// Sweep cells followed by Chevet cells, with their raw samples.
    pub cell_runs: Vec<(String, CellRun)>,
}

/// Runs `selected` checks and gathers their outputs.
pub fn run(cfg: &SweepConfig, selected: &[Check]) -> Result<RunOutput> {
    cfg.validate()?;
    let baseline = cfg.baseline.as_deref().map(Baseline::load).transpose()?;
    let has = |c: Check| selected.contains(&c);

    let mut outputs: Vec<CheckOutput> = Vec::new();
    let mut cell_runs = Vec::new();
    let mut tail_curves = Vec::new();

    if has(Check::Theorem) || has(Check::Conjecture) || has(Check::Diagonal) {
        let mut cells = checks::sweep_cells(cfg)?;
        if !has(Check::Theorem) && !has(Check::Conjecture) {
            cells.retain(|c| c.spec.is_diagonal());
        }
        let runs = checks::run_cells(&cells, cfg.n_samples, cfg.seed)?;
        if has(Check::Theorem) {
            outputs.push(checks::check_theorem(cfg, &runs, baseline.as_ref())?);
        }
        if has(Check::Conjecture) {
            outputs.push(checks::check_conjecture(&runs)?);
        }
        if has(Check::Diagonal) {
            outputs.push(checks::check_diagonal(&runs)?);
        }
        cell_runs.extend(runs.into_iter().map(|r| ("sweep".to_string(), r)));
    }
    if has(Check::Chevet) {
        let cells = checks::chevet_cells(cfg)?;
        let runs = checks::run_cells(&cells, cfg.chevet.n_samples, cfg.seed)?;
        outputs.push(checks::check_chevet(cfg, &runs, baseline.as_ref())?);
        cell_runs.extend(runs.into_iter().map(|r| ("chevet".to_string(), r)));
    }
    if has(Check::Concentration) {
        let (out, curves) = checks::check_concentration(cfg)?;
        outputs.push(out);
        tail_curves = curves;
    }
    if has(Check::Diagnostics) {
        outputs.push(checks::check_diagnostics(cfg)?);
    }

    let mut files = Vec::new();
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let mut skipped = Vec::new();
    let mut reports = Vec::new();
    for o in outputs {
        files.extend(o.files);
        failures.extend(o.failures);
        notes.extend(o.notes);
        skipped.extend(o.skipped);
        if let Some(r) = o.report {
            if !r.rows.is_empty() {
                files.extend(plots::render_ratio_plots(&r)?);
            }
            reports.push(r);
        }
    }
    if !tail_curves.is_empty() {
        files.extend(plots::render_tail_plots(&tail_curves)?);
    }
    files.push(("skipped.csv".into(), report::skipped_csv(&skipped)));

    let find = |name: &str| reports.iter().find(|r| r.name == name);
    let summary = RunSummary {
        seed: cfg.seed,
        n_samples: cfg.n_samples,
        failures: failures.len(),
        skipped: skipped.len(),
        theorem: find("theorem").and_then(|r| r.summary()),
        diagonal: find("diagonal").and_then(|r| r.summary()),
        chevet: find("chevet").and_then(|r| r.summary()),
        conjecture: find("conjecture")
            .map(|r| r.group_summaries().into_iter().map(|(group, summary)| GroupSummary { group, summary }).collect())
            .unwrap_or_default(),
    };
    files.push(("summary.toml".into(), toml::to_string(&summary).expect("summary serializes")));
    let mut log = String::new();
    for f in &failures {
        log += &format!("FAIL {f}\n");
    }
    for n in &notes {
        log += &format!("NOTE {n}\n");
    }
    files.push(("run_log.txt".into(), log));
    Ok(RunOutput { files, failures, notes, summary, reports, cell_runs })
}

/// Writes `files` under `dir`, creating it if needed.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}

/// Compares `files` with what is on disk under `dir`; returns one line per
/// missing or differing file.
pub fn verify_files(dir: &Path, files: &[(String, String)]) -> Vec<String> {
    files
        .iter()
        .filter_map(|(name, body)| match std::fs::read(dir.join(name)) {
            Err(_) => Some(format!("{name}: missing")),
            Ok(disk) if disk != body.as_bytes() => {
                let line = String::from_utf8_lossy(&disk)
                    .lines()
                    .zip(body.lines())
                    .position(|(a, b)| a != b)
                    .map_or_else(|| "length differs".to_string(), |k| format!("first difference on line {}", k + 1));
                Some(format!("{name}: {line}"))
            }
            Ok(_) => None,
        })
        .collect()
}
