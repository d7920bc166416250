//! Experiment drivers behind the command-line tool.
//!
//! Every command turns a config into a [`Report`], which serializes to JSON
//! deterministically (no timestamps, ordered maps), so re-running a command
//! with the same seed reproduces the report byte for byte.

mod commands;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

pub use commands::{cmd_complexity, cmd_run, cmd_stats, cmd_verify, load_graphs, oracle_value};
pub use report::{
    Aggregate, BestCut, ComplexityReport, ComplexityRow, Divergence, GraphInfo, OracleReport, Report, RunReport,
    StatsGraph, StatsReport, TrialRecord, VerifyCase, VerifyReport,
};

use crate::engine::{EngineConfig, EngineError};
use crate::graph::{GenSpec, GraphError, NodeId};
use crate::oracles::OracleError;
use crate::protocol::MIN_RANK_EXPONENT;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("graph {source_name}: {error}")]
    Graph { source_name: String, error: GraphError },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {error}")]
    Io { path: PathBuf, error: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Engine(EngineError::Config(_)) => 2,
            HarnessError::Graph { .. } => 3,
            HarnessError::Engine(_) | HarnessError::Oracle(_) => 4,
            HarnessError::Io { .. } | HarnessError::Csv(_) | HarnessError::Json(_) => 6,
        }
    }
}

/// Exit status for a command that ran but whose checks failed.
pub const EXIT_CHECK_FAILED: i32 = 5;

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    /// Generated graphs use seeds `seed, seed + 1, ...`.
    Gen { spec: GenSpec, seed: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OracleChoice {
    Brute,
    Sw,
    /// Exhaustive search when small enough, Stoer-Wagner otherwise.
    #[default]
    Auto,
}

impl FromStr for OracleChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brute" => Ok(OracleChoice::Brute),
            "sw" => Ok(OracleChoice::Sw),
            "auto" => Ok(OracleChoice::Auto),
            _ => Err(HarnessError::Config(format!("unknown oracle {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EmitFormat {
    #[default]
    Json,
    Text,
    Csv,
}

impl FromStr for EmitFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(EmitFormat::Json),
            "text" => Ok(EmitFormat::Text),
            "csv" => Ok(EmitFormat::Csv),
            _ => Err(HarnessError::Config(format!("unknown output format {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: GraphSource,
    /// Number of generated graphs; must be 1 for file sources.
    pub graphs: u32,
    pub seed: u64,
    pub trials: Option<u64>,
    pub k: u32,
    pub pulse_budget_const: u64,
    pub oracle: OracleChoice,
    pub trace: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(source: GraphSource) -> Self {
        let engine = EngineConfig::default();
        ExperimentConfig {
            source,
            graphs: 1,
            seed: 0,
            trials: None,
            k: engine.k,
            pulse_budget_const: engine.pulse_budget_const,
            oracle: OracleChoice::Auto,
            trace: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.k < MIN_RANK_EXPONENT {
            return Err(HarnessError::Config(format!("--k must be at least {MIN_RANK_EXPONENT}, got {}", self.k)));
        }
        if self.trials == Some(0) {
            return Err(HarnessError::Config("--trials must be at least 1".into()));
        }
        if self.pulse_budget_const == 0 {
            return Err(HarnessError::Config("--pulse-budget-const must be positive".into()));
        }
        if self.graphs == 0 {
            return Err(HarnessError::Config("--graphs must be at least 1".into()));
        }
        if matches!(self.source, GraphSource::File(_)) && self.graphs != 1 {
            return Err(HarnessError::Config("--graphs only applies to generated graphs".into()));
        }
        Ok(())
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig {
            k: self.k,
            pulse_budget_const: self.pulse_budget_const,
            record_trace: self.trace.is_some(),
            ..EngineConfig::default()
        }
    }
}

/// Graph family for size sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Cycle,
    Path,
    Complete,
    /// Random connected graphs with the given extra-edge density and weights 1..=10.
    Random { density: f64 },
}

impl Family {
    pub fn spec(&self, n: u32) -> GenSpec {
        match *self {
            Family::Cycle => GenSpec::Cycle { n, weight: 1 },
            Family::Path => GenSpec::Path { n, weight: 1 },
            Family::Complete => GenSpec::Complete { n, weight: 1 },
            Family::Random { density } => GenSpec::RandomConnected { n, density, w_min: 1, w_max: 10 },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cycle => f.write_str("cycle"),
            Family::Path => f.write_str("path"),
            Family::Complete => f.write_str("complete"),
            Family::Random { density } => write!(f, "random:{density}"),
        }
    }
}

impl FromStr for Family {
    type Err = HarnessError;

    /// `cycle`, `path`, `complete`, `random` or `random:DENSITY`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
        let family = match (name, arg) {
            ("cycle", None) => Family::Cycle,
            ("path", None) => Family::Path,
            ("complete", None) => Family::Complete,
            ("random" | "random-connected", None) => Family::Random { density: 0.3 },
            ("random" | "random-connected", Some(d)) => {
                let density: f64 = d.parse().map_err(|_| HarnessError::Config(format!("bad density in {s:?}")))?;
                if !(0.0..=1.0).contains(&density) {
                    return Err(HarnessError::Config(format!("density must lie in [0, 1], got {density}")));
                }
                Family::Random { density }
            }
            _ => return Err(HarnessError::Config(format!("unknown family {s:?}"))),
        };
        Ok(family)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsConfig {
    pub experiment: ExperimentConfig,
    /// Single trials per graph for the per-trial success estimate.
    pub single_trials: u64,
    /// Full experiments of `ceil(n^2 ln n)` trials (or `--trials`) per graph.
    pub repetitions: u32,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityConfig {
    pub family: Family,
    pub sizes: Vec<u32>,
    pub seed: u64,
    pub trials: u64,
    pub k: u32,
    pub pulse_budget_const: u64,
}

impl ComplexityConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.sizes.is_empty() {
            return Err(HarnessError::Config("--sizes must list at least one size".into()));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("--trials must be at least 1".into()));
        }
        if self.k < MIN_RANK_EXPONENT {
            return Err(HarnessError::Config(format!("--k must be at least {MIN_RANK_EXPONENT}, got {}", self.k)));
        }
        Ok(())
    }
}

/// Vertices on each side, the side holding vertex 1 first.
pub(crate) fn sides(p: &crate::oracles::Bipartition) -> [Vec<NodeId>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for v in 1..=p.len() as NodeId {
        out[usize::from(p.side_of(v))].push(v);
    }
    out
}

#[cfg(test)]
mod tests;
