//! Line-based experiment configuration: `key = value` entries grouped under
//! `[experiment]` section headers. Unknown keys are rejected and every
//! violation is reported with its line number.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::fracparams;

/// A single configuration problem, tied to the line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigViolation {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Which check suite an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Dtn,
    Iterated,
    Singular,
    Poisson,
    Jets,
    QGamma,
    Sweep,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dtn" => Some(Self::Dtn),
            "iterated" => Some(Self::Iterated),
            "singular" => Some(Self::Singular),
            "poisson" => Some(Self::Poisson),
            "jets" => Some(Self::Jets),
            "qgamma" => Some(Self::QGamma),
            "sweep" => Some(Self::Sweep),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Dtn => "dtn",
            Self::Iterated => "iterated",
            Self::Singular => "singular",
            Self::Poisson => "poisson",
            Self::Jets => "jets",
            Self::QGamma => "qgamma",
            Self::Sweep => "sweep",
        }
    }

    pub fn all() -> [Self; 7] {
        [
            Self::Dtn,
            Self::Iterated,
            Self::Singular,
            Self::Poisson,
            Self::Jets,
            Self::QGamma,
            Self::Sweep,
        ]
    }
}

/// One experiment block.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub gammas: Vec<f64>,
    pub n: u32,
    pub grid_sizes: Vec<usize>,
    pub kmags: Vec<f64>,
    pub mesh_n: usize,
    pub mesh_y: f64,
    pub mesh_p: Option<f64>,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Dtn,
            gammas: vec![0.5],
            n: 2,
            grid_sizes: vec![64],
            kmags: vec![1.0],
            mesh_n: 2048,
            mesh_y: 8.0,
            mesh_p: None,
            tolerance: 1e-3,
            seed: 0,
        }
    }
}

/// A parsed configuration: a list of experiments, run in order.
#[derive(Debug, Clone, Default)]
pub struct RunPlan {
    pub experiments: Vec<ExperimentConfig>,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "gamma",
    "n",
    "grid_sizes",
    "kmag",
    "mesh_n",
    "mesh_y",
    "mesh_p",
    "tolerance",
    "seed",
];

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, ()> {
    let items: std::result::Result<Vec<T>, _> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse::<T>)
        .collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(()),
    }
}

/// Parse a full configuration. All violations are collected; the plan is
/// returned only when there are none.
pub fn parse_config(text: &str) -> Result<RunPlan> {
    let mut violations = Vec::new();
    let mut plan = RunPlan::default();
    let mut current: Option<ExperimentConfig> = None;
    let mut seen_keys: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line == "[experiment]" {
                if let Some(done) = current.take() {
                    plan.experiments.push(done);
                }
                current = Some(ExperimentConfig::default());
                seen_keys.clear();
            } else {
                violations.push(ConfigViolation {
                    line: lineno,
                    message: format!("unknown section {line}; expected [experiment]"),
                });
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(ConfigViolation {
                line: lineno,
                message: format!("expected key = value, got {line:?}"),
            });
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        let Some(cfg) = current.as_mut() else {
            violations.push(ConfigViolation {
                line: lineno,
                message: "key outside any [experiment] section".into(),
            });
            continue;
        };
        if !KNOWN_KEYS.contains(&key) {
            violations.push(ConfigViolation {
                line: lineno,
                message: format!("unknown key {key:?}"),
            });
            continue;
        }
        if !seen_keys.insert(key.to_string()) {
            violations.push(ConfigViolation {
                line: lineno,
                message: format!("duplicate key {key:?}"),
            });
            continue;
        }
        let mut bad = |msg: String| {
            violations.push(ConfigViolation {
                line: lineno,
                message: msg,
            })
        };
        match key {
            "experiment" => match ExperimentKind::parse(value) {
                Some(kind) => cfg.kind = kind,
                None => bad(format!("unknown experiment {value:?}")),
            },
            "gamma" => match parse_list::<f64>(value) {
                Ok(v) => cfg.gammas = v,
                Err(()) => bad(format!("gamma must be a comma-separated list of reals, got {value:?}")),
            },
            "n" => match value.parse::<u32>() {
                Ok(v) => cfg.n = v,
                Err(_) => bad(format!("n must be a positive integer, got {value:?}")),
            },
            "grid_sizes" => match parse_list::<usize>(value) {
                Ok(v) => cfg.grid_sizes = v,
                Err(()) => bad(format!("grid_sizes must be a list of integers, got {value:?}")),
            },
            "kmag" => match parse_list::<f64>(value) {
                Ok(v) => cfg.kmags = v,
                Err(()) => bad(format!("kmag must be a list of reals, got {value:?}")),
            },
            "mesh_n" => match value.parse::<usize>() {
                Ok(v) => cfg.mesh_n = v,
                Err(_) => bad(format!("mesh_n must be an integer, got {value:?}")),
            },
            "mesh_y" => match value.parse::<f64>() {
                Ok(v) if v > 0.0 => cfg.mesh_y = v,
                _ => bad(format!("mesh_y must be a positive real, got {value:?}")),
            },
            "mesh_p" => match value.parse::<f64>() {
                Ok(v) if v >= 1.0 => cfg.mesh_p = Some(v),
                _ => bad(format!("mesh_p must be a real >= 1, got {value:?}")),
            },
            "tolerance" => match value.parse::<f64>() {
                Ok(v) if v > 0.0 => cfg.tolerance = v,
                _ => bad(format!("tolerance must be positive, got {value:?}")),
            },
            "seed" => match value.parse::<u64>() {
                Ok(v) => cfg.seed = v,
                Err(_) => bad(format!("seed must be a u64, got {value:?}")),
            },
            _ => unreachable!("key filtered above"),
        }
    }
    if let Some(done) = current.take() {
        plan.experiments.push(done);
    }

    // semantic checks: gamma admissibility against n, grid sanity
    for (i, cfg) in plan.experiments.iter().enumerate() {
        for &g in &cfg.gammas {
            if let Err(e) = fracparams::make_params(cfg.n, g) {
                violations.push(ConfigViolation {
                    line: 0,
                    message: format!("experiment {}: {e}", i + 1),
                });
            }
        }
        for &size in &cfg.grid_sizes {
            if size < 2 || !size.is_power_of_two() {
                violations.push(ConfigViolation {
                    line: 0,
                    message: format!(
                        "experiment {}: grid size {size} is not a power of two",
                        i + 1
                    ),
                });
            }
        }
    }

    if violations.is_empty() {
        Ok(plan)
    } else {
        Err(Error::Config(violations))
    }
}
