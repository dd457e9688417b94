use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use pqlab::bounds::{bvh_rhs, conjecture_functional, lemma32_rhs, theorem_main_rhs, BoundBreakdown};
use pqlab::csvfmt::float;
use pqlab::harness::{self, Check, ProfileSpec, SweepConfig};
use pqlab::montecarlo::{opnorm_samples, summarize, write_samples_csv};
use pqlab::pqnorm::PowerOptions;
use pqlab::{NormPair, VarianceProfile};

/// Operator norms of Gaussian matrices with a variance profile: estimates,
/// bounds and sweep checks.
#[derive(Parser, Debug)]
#[command(name = "pqlab", version)]
struct Cli {
    /// Base seed for all random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Operator-norm samples per cell (sweep and Chevet cells).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML sweep configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write per-sample norm values (`sample_index,value`): a file for
    /// `estimate`, a directory with one file per cell otherwise.
    #[arg(long, global = true)]
    dump_samples: Option<PathBuf>,
    /// Recompute and compare against the files already in the output directory.
    #[arg(long, global = true)]
    verify: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Monte Carlo estimate of E‖G‖ and (E‖G‖^q)^{1/q} for one profile.
    Estimate(Single),
    /// Term-by-term right-hand sides for one profile.
    Bound {
        #[command(flatten)]
        single: Single,
        /// Value for the unknown absolute constants.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Moment estimate against the main upper bound, per sweep cell.
    CheckTheorem,
    /// Mean estimate against the conjectured two-sided functional.
    CheckConjecture,
    /// Tensor profiles against the two-term Chevet expression.
    CheckChevet,
    /// Diagonal profiles against the expected maximum and its comparators.
    CheckDiagonal,
    /// Empirical tails of weighted Gaussian norms against the concentration bound.
    CheckConcentration,
    /// Comparator brackets and the variational identity on the pinned corpora.
    Diagnostics,
    /// All checks.
    Sweep {
        /// Also write the regression baseline of this run to the given file.
        #[arg(long)]
        write_baseline: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Single {
    /// Profile file (`m n` header, then rows).
    #[arg(long, conflicts_with = "family")]
    profile: Option<PathBuf>,
    /// Profile family spec, e.g. `iid:1` or `tensor-geom:0.9`.
    #[arg(long, requires = "dims")]
    family: Option<String>,
    /// Shape for `--family`.
    #[arg(long, num_args = 2, value_names = ["M", "N"])]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    p_star: f64,
    /// Target exponent; `inf` allowed.
    #[arg(long)]
    q: f64,
}

impl Single {
    fn load(&self, seed: u64) -> anyhow::Result<(VarianceProfile, NormPair)> {
        let pair = NormPair::new(self.p_star, self.q)?;
        let profile = match (&self.profile, &self.family, &self.dims) {
            (Some(path), _, _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                VarianceProfile::parse(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(f), Some(d)) => ProfileSpec::parse(f)?.build(d[0], d[1], seed)?,
            _ => bail!("give either --profile FILE or --family SPEC --dims M N"),
        };
        Ok((profile, pair))
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<SweepConfig> {
    let mut cfg = match &cli.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.n_samples = n;
        cfg.chevet.n_samples = n;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_breakdown(b: &BoundBreakdown) {
    print!("{}", b.csv_rows());
    for n in &b.notes {
        eprintln!("note ({}): {n}", b.name);
    }
}

fn estimate(cli: &Cli, single: &Single) -> anyhow::Result<ExitCode> {
    let cfg = load_config(cli)?;
    let (profile, pair) = single.load(cfg.seed)?;
    let samples = opnorm_samples(&profile, pair, cfg.n_samples, cfg.seed, &PowerOptions::default())?;
    let e = summarize(&samples, Some(pair.q()), cfg.seed)?;
    if let Some(path) = &cli.dump_samples {
        let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_samples_csv(std::io::BufWriter::new(f), &samples)?;
    }
    println!("quantity,value");
    println!("mean,{}", float(e.mean));
    println!("std_err,{}", float(e.std_err));
    println!("ci_lo,{}", float(e.ci_lo));
    println!("ci_hi,{}", float(e.ci_hi));
    if let (Some(r), Some(se)) = (e.q_moment_root, e.q_moment_std_err) {
        println!("q_moment_root,{}", float(r));
        println!("q_moment_std_err,{}", float(se));
    }
    println!("n_samples,{}", e.n_samples);
    println!("seed,{}", e.seed);
    Ok(ExitCode::SUCCESS)
}

fn bound(cli: &Cli, single: &Single, c: f64) -> anyhow::Result<ExitCode> {
    let cfg = load_config(cli)?;
    let (profile, pair) = single.load(cfg.seed)?;
    println!("bound_name,term_label,value");
    if pair.in_theorem_range() {
        if profile.m() >= 2 {
            print_breakdown(&theorem_main_rhs(&profile, pair, c)?);
        } else {
            eprintln!("note: main bound needs m >= 2, omitted");
        }
        print_breakdown(&lemma32_rhs(&profile, pair, c)?);
    } else {
        eprintln!("note: {} is outside the theorem range, main bound omitted", pair.label());
    }
    print_breakdown(&conjecture_functional(&profile, pair)?);
    if pair.p_star() == 2.0 && pair.q() == 2.0 {
        print_breakdown(&bvh_rhs(&profile, c)?);
    }
    Ok(ExitCode::SUCCESS)
}

fn dump_cells(dir: &Path, out: &harness::RunOutput) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (kind, run) in &out.cell_runs {
        let path = dir.join(format!("{kind}_cell{:04}.csv", run.cell.id));
        let f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_samples_csv(std::io::BufWriter::new(f), &run.samples)?;
    }
    Ok(())
}

fn checks(cli: &Cli, selected: &[Check], write_baseline: Option<&Path>) -> anyhow::Result<ExitCode> {
    let cfg = load_config(cli)?;
    let out = harness::run(&cfg, selected)?;
    let dir = &cfg.output_dir;
    if cli.verify {
        let diffs = harness::verify_files(dir, &out.files);
        for d in &diffs {
            eprintln!("verify: {d}");
        }
        if !diffs.is_empty() {
            return Ok(ExitCode::from(2));
        }
        eprintln!("verify: {} files identical", out.files.len());
    } else {
        harness::write_files(dir, &out.files).with_context(|| format!("writing to {}", dir.display()))?;
        if let Some(d) = &cli.dump_samples {
            dump_cells(d, &out)?;
        }
        if let Some(path) = write_baseline {
            let b = out.summary.baseline().context("baseline needs the theorem and Chevet checks")?;
            std::fs::write(path, b.to_toml()).with_context(|| format!("writing {}", path.display()))?;
        }
        eprintln!("wrote {} files to {}", out.files.len(), dir.display());
    }
    for n in &out.notes {
        eprintln!("note: {n}");
    }
    for f in &out.failures {
        eprintln!("FAIL: {f}");
    }
    Ok(if out.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn dispatch(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.cmd {
        Cmd::Estimate(s) => estimate(cli, s),
        Cmd::Bound { single, c } => bound(cli, single, *c),
        Cmd::CheckTheorem => checks(cli, &[Check::Theorem], None),
        Cmd::CheckConjecture => checks(cli, &[Check::Conjecture], None),
        Cmd::CheckChevet => checks(cli, &[Check::Chevet], None),
        Cmd::CheckDiagonal => checks(cli, &[Check::Diagonal], None),
        Cmd::CheckConcentration => checks(cli, &[Check::Concentration], None),
        Cmd::Diagnostics => checks(cli, &[Check::Diagnostics], None),
        Cmd::Sweep { write_baseline } => checks(cli, &Check::ALL, write_baseline.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
