//! Sweep configuration, read from a TOML file.
//!
//! Every field has a default; an empty file gives the standard desk-scale
//! sweep. `q = inf` is written as the TOML float `inf`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::spec::{parse_weights, ProfileSpec};
use crate::error::{Error, Result};
use crate::profiles::NormPair;

/// Names accepted in `[constants]`, all defaulting to 1.
pub const CONSTANT_KEYS: [&str; 1] = ["theorem_main"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub output_dir: PathBuf,
    pub profiles: Vec<String>,
    pub pairs: Vec<(f64, f64)>,
    pub dims: Vec<(usize, usize)>,
    pub constants: BTreeMap<String, f64>,
    /// Regression baseline to compare against, if any.
    pub baseline: Option<PathBuf>,
    pub chevet: ChevetConfig,
    pub concentration: ConcentrationConfig,
    pub diagnostics: DiagnosticsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChevetConfig {
    pub profiles: Vec<String>,
    pub pairs: Vec<(f64, f64)>,
    pub sizes: Vec<usize>,
    pub n_samples: usize,
    /// Every ratio must land inside this interval.
    pub bracket: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailCase {
    pub weights: String,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationConfig {
    pub cases: Vec<TailCase>,
    pub t_grid: Vec<f64>,
    pub n_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Bracket for `E max / max_k √ln(k+3)·a*_k`.
    pub maxgaus_bracket: (f64, f64),
    /// Bracket for `E max / Orlicz norm`.
    pub orlicz_bracket: (f64, f64),
    /// Relative tolerance for the variational identity of `σ`.
    pub sigma_rel_tol: f64,
}

fn grid_pairs() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for ps in [1.25, 1.5, 2.0] {
        for q in [2.0, 3.0, 4.0, 8.0] {
            v.push((ps, q));
        }
    }
    v
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_samples: 500,
            output_dir: PathBuf::from("out"),
            profiles: ["iid:1", "tensor-geom:0.9", "diag-power:0.5", "sparse:0.1"].map(String::from).to_vec(),
            pairs: grid_pairs(),
            dims: [4, 8, 16, 32, 64].iter().map(|&d| (d, d)).collect(),
            constants: BTreeMap::new(),
            baseline: None,
            chevet: ChevetConfig::default(),
            concentration: ConcentrationConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
        }
    }
}

impl Default for ChevetConfig {
    fn default() -> Self {
        Self {
            profiles: ["tensor-unit", "iid:1", "tensor-geom:0.5", "tensor-geom:0.9", "tensor-power:0.5", "tensor-power:1"]
                .map(String::from)
                .to_vec(),
            pairs: vec![(1.5, 2.0), (1.5, 4.0), (2.0, 2.0), (2.0, 4.0)],
            sizes: vec![8, 32],
            n_samples: 500,
            bracket: (0.2, 5.0),
        }
    }
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        let cases = [
            ("ones:1", 2.0),
            ("list:1,0,0", 2.0),
            ("ones:5", 2.0),
            ("ones:20", 2.5),
            ("power:20:0.5", 3.0),
            ("geom:10:0.5", 2.0),
            ("ones:50", 4.0),
            ("power:100:1", 2.0),
            ("list:1,0.5,0.25", 8.0),
            ("geom:30:0.8", 6.0),
        ]
        .map(|(w, p)| TailCase { weights: w.into(), p })
        .to_vec();
        Self { cases, t_grid: vec![0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0], n_samples: 100_000 }
    }
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { maxgaus_bracket: (0.5, 4.0), orlicz_bracket: (0.25, 4.0), sigma_rel_tol: 1e-6 }
    }
}

fn check_bracket(name: &str, b: (f64, f64)) -> Result<()> {
    if !(b.0 > 0.0 && b.0 < b.1 && b.1.is_finite()) {
        return Err(Error::Domain(format!("{name}: bracket must satisfy 0 < lo < hi < inf")));
    }
    Ok(())
}

fn check_samples(name: &str, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("{name}: need at least 2 samples")));
    }
    Ok(())
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Domain(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        check_samples("n_samples", self.n_samples)?;
        for s in self.profiles.iter().chain(&self.chevet.profiles) {
            ProfileSpec::parse(s)?;
        }
        for &(ps, q) in self.pairs.iter().chain(&self.chevet.pairs) {
            NormPair::new(ps, q)?;
        }
        for &(m, n) in &self.dims {
            if m == 0 || n == 0 {
                return Err(Error::Dimensions { m, n });
            }
        }
        if self.chevet.sizes.contains(&0) {
            return Err(Error::Domain("chevet.sizes: sizes must be >= 1".into()));
        }
        for (k, v) in &self.constants {
            if !CONSTANT_KEYS.contains(&k.as_str()) {
                return Err(Error::Domain(format!("constants: unknown key `{k}` (known: {CONSTANT_KEYS:?})")));
            }
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Domain(format!("constants.{k} must be positive and finite")));
            }
        }
        check_samples("chevet.n_samples", self.chevet.n_samples)?;
        check_bracket("chevet.bracket", self.chevet.bracket)?;
        check_samples("concentration.n_samples", self.concentration.n_samples)?;
        for c in &self.concentration.cases {
            parse_weights(&c.weights)?;
            // the bound uses max|a_j| as the weak variance, which needs p >= 2
            if !(c.p >= 2.0 && c.p.is_finite()) {
                return Err(Error::Exponent(c.p, "concentration cases need finite p >= 2"));
            }
        }
        let g = &self.concentration.t_grid;
        if g.is_empty() || g[0] <= 0.0 || g.windows(2).any(|w| !(w[1] > w[0])) || g.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("concentration.t_grid must be positive, finite and increasing".into()));
        }
        check_bracket("diagnostics.maxgaus_bracket", self.diagnostics.maxgaus_bracket)?;
        check_bracket("diagnostics.orlicz_bracket", self.diagnostics.orlicz_bracket)?;
        if !(self.diagnostics.sigma_rel_tol > 0.0) {
            return Err(Error::Domain("diagnostics.sigma_rel_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn constant(&self, key: &str) -> f64 {
        self.constants.get(key).copied().unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(SweepConfig::from_toml("").unwrap(), SweepConfig::default());
        SweepConfig::default().validate().unwrap();
    }

    #[test]
    fn round_trip_through_toml() {
        let mut c = SweepConfig::default();
        c.pairs.push((1.0, f64::INFINITY));
        let back = SweepConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parses_partial_config() {
        let c = SweepConfig::from_toml(
            "seed = 7\nn_samples = 20\npairs = [[1.5, 3.0], [1.0, inf]]\ndims = [[2, 3]]\n\
             [constants]\ntheorem_main = 2.0\n[chevet]\nsizes = [4]\n",
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.pairs[1], (1.0, f64::INFINITY));
        assert_eq!(c.constant("theorem_main"), 2.0);
        assert_eq!(c.chevet.sizes, vec![4]);
        assert_eq!(c.chevet.n_samples, 500);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            "pairs = [[2.5, 3.0]]",
            "n_samples = 1",
            "profiles = [\"what:1\"]",
            "dims = [[0, 3]]",
            "unknown = 1",
            "[constants]\nfoo = 1.0",
            "[concentration]\nt_grid = [1.0, 0.5]",
            "[chevet]\nbracket = [5.0, 0.2]",
        ] {
            assert!(SweepConfig::from_toml(bad).is_err(), "{bad}");
        }
    }
}
