use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EmitFormat, HarnessError};
use crate::engine::{AbortRecord, TrialMetrics};
use crate::graph::{NodeId, Weight};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
// one report per command run, so the unboxed run variant costs nothing
#[allow(clippy::large_enum_variant)]
#[serde(tag = "command", content = "report", rename_all = "lowercase")]
pub enum Report {
    Run(RunReport),
    Verify(VerifyReport),
    Stats(StatsReport),
    Complexity(ComplexityReport),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInfo {
    /// File path, or generator spec with `@seed`.
    pub source: String,
    pub n: u32,
    pub m: usize,
    pub total_weight: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    /// `brute` or `sw`.
    pub kind: String,
    pub value: Weight,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestCut {
    pub value: Weight,
    pub trial: u64,
    /// The side containing vertex 1, then the other side.
    pub sides: [Vec<NodeId>; 2],
    /// `[u, v, w]` with `u < v`.
    pub cut_edges: Vec<[u64; 3]>,
    /// Each vertex's own view of which incident edges are in the cut.
    pub incident_cut_edges: BTreeMap<NodeId, Vec<NodeId>>,
    pub contractions: Vec<[NodeId; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub value: Weight,
    pub metrics: TrialMetrics,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: u64,
    pub messages_total: u64,
    pub messages_mean: f64,
    pub messages_max: u64,
    pub pulses_mean: f64,
    pub pulses_max: u64,
    pub collision_aborts: u64,
}

impl Aggregate {
    pub fn of(metrics: &[TrialMetrics]) -> Self {
        let trials = metrics.len() as u64;
        let messages_total: u64 = metrics.iter().map(|m| m.messages_total).sum();
        let pulses_total: u64 = metrics.iter().map(|m| m.pulses).sum();
        let mean = |x: u64| if trials == 0 { 0.0 } else { x as f64 / trials as f64 };
        Aggregate {
            trials,
            messages_total,
            messages_mean: mean(messages_total),
            messages_max: metrics.iter().map(|m| m.messages_total).max().unwrap_or(0),
            pulses_mean: mean(pulses_total),
            pulses_max: metrics.iter().map(|m| m.pulses).max().unwrap_or(0),
            collision_aborts: metrics.iter().map(|m| u64::from(m.collision_aborts)).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub graph: GraphInfo,
    pub seed: u64,
    pub k: u32,
    pub best: BestCut,
    pub oracle: Option<OracleReport>,
    /// Fraction of trials that hit the oracle value.
    pub success_rate: Option<f64>,
    pub aggregate: Aggregate,
    pub aborts: Vec<AbortRecord>,
    pub per_trial: Vec<TrialRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    /// Position in the contraction sequence.
    pub index: usize,
    pub distributed: Option<[NodeId; 2]>,
    pub sequential: Option<[NodeId; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyCase {
    pub graph: String,
    pub trial: u64,
    pub attempt: u32,
    pub distributed_value: Weight,
    pub sequential_value: Weight,
    pub oracle_value: Weight,
    pub contractions: usize,
    pub equivalent: bool,
    pub above_oracle: bool,
    pub first_divergence: Option<Divergence>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub graphs: Vec<GraphInfo>,
    pub pairs: u64,
    pub equivalent: u64,
    pub below_oracle: u64,
    pub passed: bool,
    pub cases: Vec<VerifyCase>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsGraph {
    pub graph: GraphInfo,
    pub oracle_value: Weight,
    /// Number of minimum cuts, when small enough to enumerate.
    pub min_cut_count: Option<usize>,
    pub single_trials: u64,
    pub single_successes: u64,
    pub per_trial_rate: f64,
    /// `1 / C(n, 2)`.
    pub bound: f64,
    /// `P(X <= successes)` for `X ~ Binomial(single_trials, bound)`.
    pub p_value: f64,
    pub below_bound: bool,
    pub repetitions: u32,
    pub trials_per_repetition: u64,
    pub repetition_successes: u32,
    pub repetition_rate: f64,
    pub collision_aborts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub seed: u64,
    pub alpha: f64,
    pub passed: bool,
    pub graphs: Vec<StatsGraph>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub n: u32,
    pub m: usize,
    pub graph: String,
    pub trials: u64,
    pub messages_mean: f64,
    pub messages_max: u64,
    pub pulses_mean: f64,
    pub pulses_max: u64,
    pub pulse_budget: u64,
    /// `messages_max / (m n^2)`.
    pub messages_per_mn2: f64,
    /// `pulses_max / n^2`.
    pub pulses_per_n2: f64,
    pub collision_aborts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub family: String,
    pub seed: u64,
    pub rows: Vec<ComplexityRow>,
    /// Least-squares `c` in `messages = c m n^2` over all rows.
    pub fitted_messages_per_mn2: f64,
    /// Least-squares `c` in `pulses = c n^2` over all rows.
    pub fitted_pulses_per_n2: f64,
    pub within_budget: bool,
}

impl Report {
    /// Whether every check the command makes passed.
    pub fn passed(&self) -> bool {
        match self {
            Report::Run(r) => r.oracle.as_ref().is_none_or(|o| r.best.value >= o.value),
            Report::Verify(r) => r.passed,
            Report::Stats(r) => r.passed,
            Report::Complexity(r) => r.within_budget,
        }
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn render(&self, format: EmitFormat) -> Result<String, HarnessError> {
        match format {
            EmitFormat::Json => self.to_json(),
            EmitFormat::Text => Ok(self.to_text()),
            EmitFormat::Csv => self.to_csv(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Report::Run(r) => {
                let g = &r.graph;
                let _ = writeln!(out, "graph      {} (n={}, m={}, W={})", g.source, g.n, g.m, g.total_weight);
                let _ = writeln!(out, "seed       {}  k={}  trials={}", r.seed, r.k, r.aggregate.trials);
                let _ = writeln!(out, "best cut   {} (trial {})", r.best.value, r.best.trial);
                let _ = writeln!(out, "sides      {:?} | {:?}", r.best.sides[0], r.best.sides[1]);
                if let Some(o) = &r.oracle {
                    let verdict = if o.matches { "match" } else { "MISMATCH" };
                    let _ = writeln!(out, "oracle     {} = {} ({verdict})", o.kind, o.value);
                }
                if let Some(rate) = r.success_rate {
                    let _ = writeln!(out, "success    {rate:.4}");
                }
                let a = &r.aggregate;
                let _ = writeln!(out, "messages   mean {:.1}  max {}", a.messages_mean, a.messages_max);
                let _ = writeln!(out, "pulses     mean {:.1}  max {}", a.pulses_mean, a.pulses_max);
                let _ = writeln!(out, "aborts     {}", a.collision_aborts);
                let _ = writeln!(out, "\nvertex  cut edges");
                for (v, nbrs) in &r.best.incident_cut_edges {
                    let _ = writeln!(out, "{v:>6}  {nbrs:?}");
                }
            }
            Report::Verify(r) => {
                let _ = writeln!(
                    out,
                    "{} pairs, {} trace-equivalent, {} below oracle: {}",
                    r.pairs,
                    r.equivalent,
                    r.below_oracle,
                    if r.passed { "ok" } else { "FAILED" }
                );
                for c in r.cases.iter().filter(|c| !c.equivalent || !c.above_oracle) {
                    let _ = writeln!(
                        out,
                        "  {} trial {}: distributed {} sequential {} oracle {} divergence {:?}",
                        c.graph, c.trial, c.distributed_value, c.sequential_value, c.oracle_value, c.first_divergence
                    );
                }
            }
            Report::Stats(r) => {
                let _ = writeln!(
                    out,
                    "{:<28} {:>4} {:>7} {:>8} {:>8} {:>10} {:>8}",
                    "graph", "n", "oracle", "rate", "bound", "p-value", "reps ok"
                );
                for s in &r.graphs {
                    let _ = writeln!(
                        out,
                        "{:<28} {:>4} {:>7} {:>8.4} {:>8.4} {:>10.3e} {:>4}/{:<3}",
                        s.graph.source,
                        s.graph.n,
                        s.oracle_value,
                        s.per_trial_rate,
                        s.bound,
                        s.p_value,
                        s.repetition_successes,
                        s.repetitions
                    );
                }
                let _ = writeln!(out, "alpha {}: {}", r.alpha, if r.passed { "ok" } else { "FAILED" });
            }
            Report::Complexity(r) => {
                let _ = writeln!(
                    out,
                    "{:>5} {:>6} {:>12} {:>10} {:>10} {:>12}",
                    "n", "m", "messages", "pulses", "msg/mn^2", "pulses/n^2"
                );
                for row in &r.rows {
                    let _ = writeln!(
                        out,
                        "{:>5} {:>6} {:>12} {:>10} {:>10.4} {:>12.4}",
                        row.n, row.m, row.messages_max, row.pulses_max, row.messages_per_mn2, row.pulses_per_n2
                    );
                }
                let _ = writeln!(
                    out,
                    "fitted: messages ~ {:.4} m n^2, pulses ~ {:.4} n^2 ({})",
                    r.fitted_messages_per_mn2, r.fitted_pulses_per_n2, r.family
                );
            }
        }
        out
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match self {
            Report::Run(r) => {
                w.write_record(["trial", "attempt", "value", "messages", "pulses", "contractions", "iterations"])?;
                for t in &r.per_trial {
                    let m = &t.metrics;
                    w.write_record([
                        m.trial_index.to_string(),
                        m.attempt.to_string(),
                        t.value.to_string(),
                        m.messages_total.to_string(),
                        m.pulses.to_string(),
                        m.contractions.to_string(),
                        m.iterations.to_string(),
                    ])?;
                }
            }
            Report::Verify(r) => {
                for c in &r.cases {
                    w.serialize(CsvVerify {
                        graph: &c.graph,
                        trial: c.trial,
                        distributed_value: c.distributed_value,
                        sequential_value: c.sequential_value,
                        oracle_value: c.oracle_value,
                        equivalent: c.equivalent,
                    })?;
                }
            }
            Report::Stats(r) => {
                for s in &r.graphs {
                    w.serialize(CsvStats {
                        graph: &s.graph.source,
                        n: s.graph.n,
                        oracle_value: s.oracle_value,
                        single_trials: s.single_trials,
                        single_successes: s.single_successes,
                        bound: s.bound,
                        p_value: s.p_value,
                        repetitions: s.repetitions,
                        repetition_successes: s.repetition_successes,
                    })?;
                }
            }
            Report::Complexity(r) => {
                for row in &r.rows {
                    w.serialize(row)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Config(format!("csv buffer: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Serialize)]
struct CsvVerify<'a> {
    graph: &'a str,
    trial: u64,
    distributed_value: Weight,
    sequential_value: Weight,
    oracle_value: Weight,
    equivalent: bool,
}

#[derive(Serialize)]
struct CsvStats<'a> {
    graph: &'a str,
    n: u32,
    oracle_value: Weight,
    single_trials: u64,
    single_successes: u64,
    bound: f64,
    p_value: f64,
    repetitions: u32,
    repetition_successes: u32,
}
