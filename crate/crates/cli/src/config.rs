use std::path::{Path, PathBuf};

use hankel_kdv::determinant::UOptions;
use hankel_kdv::hankel::DiscretizationParams;
use hankel_kdv::potential::{Potential, Profile};
use hankel_kdv::scattering::ScatteringOptions;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Scatter,
    Solve,
    Converge,
    Compare,
}

/// Top-level run configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the subcommand when given.
    pub experiment: Option<Experiment>,
    pub out_dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub cache: bool,
    pub workers: Option<usize>,
    /// A `family` table, or `file = "path"` naming two-column `(x, q)` text.
    pub potential: toml::Table,
    #[serde(default)]
    pub scattering: ScatteringOptions,
    #[serde(default)]
    pub discretization: DiscretizationParams,
    #[serde(default)]
    pub u: UOptions,
    pub scatter: Option<ScatterConfig>,
    pub solve: Option<SolveConfig>,
    pub converge: Option<ConvergeConfig>,
    pub compare: Option<CompareConfig>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialFile {
    file: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    #[default]
    Full,
    Split,
}

/// `[start, stop]` with `n` uniform nodes, or explicit values.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Uniform { start: f64, stop: f64, n: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn nodes(&self, field: &str) -> Result<Vec<f64>, CliError> {
        let v = match *self {
            Grid::Uniform { start, stop, n } => {
                if n == 0 || !(stop >= start) || (n == 1 && stop != start) {
                    return Err(CliError::Config(format!("{field}: need n >= 1 and stop >= start")));
                }
                if n == 1 {
                    vec![start]
                } else {
                    let h = (stop - start) / (n - 1) as f64;
                    (0..n).map(|i| if i + 1 == n { stop } else { start + h * i as f64 }).collect()
                }
            }
            Grid::Values(ref v) => v.clone(),
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CliError::Config(format!("{field}: grid must be non-empty, finite and increasing")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    #[serde(default = "yes")]
    pub split: bool,
    #[serde(default = "denominator_floor")]
    pub denominator_floor: f64,
}

fn denominator_floor() -> f64 {
    1e-10
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self {
            split: true,
            denominator_floor: denominator_floor(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default)]
    pub route: RouteKind,
    pub x: Grid,
    pub t: Grid,
    pub residual_bound: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub b_list: Vec<f64>,
    pub probes: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default)]
    pub route: RouteKind,
    pub t: f64,
    pub x: Grid,
    /// Periodic box of the split-step solver.
    pub domain: (f64, f64),
    pub n_modes: usize,
    pub dt: f64,
    pub tolerance: f64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: hankel_kdv::Error| CliError::Config(e.to_string());
        self.scattering.validate().map_err(cfg)?;
        self.discretization.validate().map_err(cfg)?;
        self.u.validate().map_err(cfg)?;
        if self.potential.contains_key("file") {
            PotentialFile::deserialize(self.potential.clone()).map_err(|e| CliError::Config(format!("potential: {e}")))?;
        } else {
            self.potential(Path::new("."))?;
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        if let Some(s) = &self.solve {
            positive("solve.residual_bound", s.residual_bound)?;
        }
        if let Some(c) = &self.compare {
            positive("compare.t", c.t)?;
            positive("compare.dt", c.dt)?;
            positive("compare.tolerance", c.tolerance)?;
            if !(c.domain.1 > c.domain.0) {
                return Err(CliError::Config("compare.domain must be increasing".into()));
            }
        }
        Ok(())
    }

    /// Resolve the potential; relative files are taken from `base`.
    pub fn potential(&self, base: &Path) -> Result<Potential, CliError> {
        let bad = |e: &dyn std::fmt::Display| CliError::Config(format!("potential: {e}"));
        if self.potential.contains_key("file") {
            let spec: PotentialFile = self.potential.clone().try_into().map_err(|e| bad(&e))?;
            let path = if spec.file.is_absolute() { spec.file } else { base.join(spec.file) };
            let text = std::fs::read_to_string(&path).map_err(|e| bad(&format!("{}: {e}", path.display())))?;
            Potential::from_two_column(&text).map_err(|e| bad(&format!("{}: {e}", path.display())))
        } else {
            let profile: Profile = self.potential.clone().try_into().map_err(|e| bad(&e))?;
            Potential::new(profile, "config").map_err(|e| bad(&e))
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field} = {v} must be positive")))
    }
}
