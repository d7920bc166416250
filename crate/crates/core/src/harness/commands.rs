use std::collections::BTreeMap;
use std::fs;

use statrs::distribution::{Binomial, DiscreteCDF};

use super::report::*;
use super::{sides, ComplexityConfig, ExperimentConfig, GraphSource, HarnessError, OracleChoice, StatsConfig};
use crate::engine::{default_trials, run_experiment, run_trial_with, CutResult, EngineConfig, Experiment};
use crate::graph::{generate, parse_edge_list, Graph, Weight};
use crate::oracles::{
    brute_force_mincut, min_cut_multiplicity, sequential_karger_trial, stoer_wagner_mincut, SeededRanks,
    BRUTE_FORCE_MAX_N,
};
use crate::protocol::rank_upper;

/// Loads the configured graph, or generates `cfg.graphs` of them.
pub fn load_graphs(cfg: &ExperimentConfig) -> Result<Vec<(GraphInfo, Graph)>, HarnessError> {
    let info = |source: String, g: &Graph| GraphInfo { source, n: g.n(), m: g.m(), total_weight: g.total_weight() };
    match &cfg.source {
        GraphSource::File(path) => {
            let name = path.display().to_string();
            let text = fs::read_to_string(path).map_err(|error| HarnessError::Io { path: path.clone(), error })?;
            let g = parse_edge_list(&text).map_err(|error| HarnessError::Graph { source_name: name.clone(), error })?;
            Ok(vec![(info(name, &g), g)])
        }
        GraphSource::Gen { spec, seed } => (0..u64::from(cfg.graphs))
            .map(|i| {
                let name = format!("{spec}@{}", seed.wrapping_add(i));
                let g = generate(spec, seed.wrapping_add(i))
                    .map_err(|error| HarnessError::Graph { source_name: name.clone(), error })?;
                Ok((info(name, &g), g))
            })
            .collect(),
    }
}

/// Exact min cut value and the oracle that produced it.
pub fn oracle_value(g: &Graph, choice: OracleChoice) -> Result<(&'static str, Weight), HarnessError> {
    let brute = match choice {
        OracleChoice::Brute => true,
        OracleChoice::Sw => false,
        OracleChoice::Auto => g.n() <= BRUTE_FORCE_MAX_N,
    };
    if brute {
        Ok(("brute", brute_force_mincut(g)?.0))
    } else {
        Ok(("sw", stoer_wagner_mincut(g)))
    }
}

fn write_trace(cfg: &ExperimentConfig, best: &CutResult) -> Result<(), HarnessError> {
    let (Some(path), Some(lines)) = (&cfg.trace, &best.trace) else { return Ok(()) };
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(path, text).map_err(|error| HarnessError::Io { path: path.clone(), error })
}

fn best_cut(g: &Graph, best: &CutResult) -> BestCut {
    BestCut {
        value: best.value,
        trial: best.trial,
        sides: sides(&best.partition),
        cut_edges: best.cut_edges.iter().map(|e| [u64::from(e.u), u64::from(e.v), e.w]).collect(),
        incident_cut_edges: g.vertices().zip(best.incident_cut_edges.iter().cloned()).collect::<BTreeMap<_, _>>(),
        contractions: best.contractions.iter().map(|&(a, b)| [a, b]).collect(),
    }
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    cfg.validate()?;
    if cfg.graphs != 1 {
        return Err(HarnessError::Config("run takes a single graph".into()));
    }
    let (info, g) = load_graphs(cfg)?.pop().expect("one graph");
    let trials = cfg.trials.unwrap_or_else(|| default_trials(g.n()));
    let e = run_experiment(&g, &cfg.engine(), cfg.seed, trials)?;
    write_trace(cfg, &e.best)?;
    let (kind, value) = oracle_value(&g, cfg.oracle)?;
    let hits = e.values.iter().filter(|&&v| v == value).count();
    Ok(Report::Run(RunReport {
        graph: info,
        seed: cfg.seed,
        k: cfg.k,
        best: best_cut(&g, &e.best),
        oracle: Some(OracleReport { kind: kind.into(), value, matches: e.best.value == value }),
        success_rate: Some(hits as f64 / e.values.len() as f64),
        aggregate: Aggregate::of(&e.metrics),
        aborts: e.aborts.clone(),
        per_trial: e.values.iter().zip(&e.metrics).map(|(&value, m)| TrialRecord { value, metrics: m.clone() }).collect(),
    }))
}

/// Runs each trial distributed and replays it sequentially on the same draws.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    cfg.validate()?;
    let graphs = load_graphs(cfg)?;
    let trials = cfg.trials.unwrap_or(10);
    let engine = cfg.engine();
    let mut cases = Vec::new();
    for (info, g) in &graphs {
        let (_, oracle) = oracle_value(g, cfg.oracle)?;
        let upper = rank_upper(g.m(), cfg.k).ok_or_else(|| HarnessError::Config("m^k overflows".into()))?;
        for trial in 0..trials {
            let r = run_trial_with(g, &engine, cfg.seed, trial, |_| {})?;
            let attempt = r.metrics.attempt;
            let replay = sequential_karger_trial(g, &mut SeededRanks::new(g.n(), upper, cfg.seed, trial, attempt))?;
            let first_divergence = first_divergence(&r.contractions, &replay.contractions);
            let equivalent =
                first_divergence.is_none() && r.partition == replay.partition && r.value == replay.value;
            cases.push(VerifyCase {
                graph: info.source.clone(),
                trial,
                attempt,
                distributed_value: r.value,
                sequential_value: replay.value,
                oracle_value: oracle,
                contractions: r.contractions.len(),
                equivalent,
                above_oracle: r.value >= oracle,
                first_divergence,
            });
        }
    }
    let equivalent = cases.iter().filter(|c| c.equivalent).count() as u64;
    let below_oracle = cases.iter().filter(|c| !c.above_oracle).count() as u64;
    Ok(Report::Verify(VerifyReport {
        seed: cfg.seed,
        graphs: graphs.into_iter().map(|(i, _)| i).collect(),
        pairs: cases.len() as u64,
        equivalent,
        below_oracle,
        passed: equivalent == cases.len() as u64 && below_oracle == 0,
        cases,
    }))
}

pub(crate) fn first_divergence(a: &[(u32, u32)], b: &[(u32, u32)]) -> Option<Divergence> {
    let index = (0..a.len().max(b.len())).find(|&i| a.get(i) != b.get(i))?;
    Some(Divergence {
        index,
        distributed: a.get(index).map(|&(x, y)| [x, y]),
        sequential: b.get(index).map(|&(x, y)| [x, y]),
    })
}

/// `P(X <= successes)` under `Binomial(trials, p)`.
pub(crate) fn binomial_lower_tail(successes: u64, trials: u64, p: f64) -> f64 {
    Binomial::new(p, trials).expect("p lies in [0, 1]").cdf(successes)
}

/// Seed of the `r`-th full repetition, kept apart from the single-trial stream.
fn repetition_seed(seed: u64, r: u32) -> u64 {
    seed ^ 0xA076_1D64_78BD_642F_u64.wrapping_mul(u64::from(r) + 1)
}

pub fn cmd_stats(cfg: &StatsConfig) -> Result<Report, HarnessError> {
    let base = &cfg.experiment;
    base.validate()?;
    if cfg.single_trials == 0 {
        return Err(HarnessError::Config("--single-trials must be at least 1".into()));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(HarnessError::Config(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
    }
    let engine = EngineConfig { record_trace: false, ..base.engine() };
    let mut out = Vec::new();
    for (info, g) in load_graphs(base)? {
        let (_, oracle) = oracle_value(&g, base.oracle)?;
        let min_cut_count = (g.n() <= BRUTE_FORCE_MAX_N).then(|| min_cut_multiplicity(&g)).transpose()?.map(|x| x.1);
        let single = run_experiment(&g, &engine, base.seed, cfg.single_trials)?;
        let successes = single.values.iter().filter(|&&v| v == oracle).count() as u64;
        let n = f64::from(g.n());
        let bound = 2.0 / (n * (n - 1.0));
        let p_value = binomial_lower_tail(successes, cfg.single_trials, bound);

        let per_rep = base.trials.unwrap_or_else(|| default_trials(g.n()));
        let mut rep_ok = 0;
        let mut aborts = single.aborts.len() as u64;
        for r in 0..cfg.repetitions {
            let e: Experiment = run_experiment(&g, &engine, repetition_seed(base.seed, r), per_rep)?;
            rep_ok += u32::from(e.best.value == oracle);
            aborts += e.aborts.len() as u64;
        }
        out.push(StatsGraph {
            graph: info,
            oracle_value: oracle,
            min_cut_count,
            single_trials: cfg.single_trials,
            single_successes: successes,
            per_trial_rate: successes as f64 / cfg.single_trials as f64,
            bound,
            p_value,
            below_bound: p_value < cfg.alpha,
            repetitions: cfg.repetitions,
            trials_per_repetition: per_rep,
            repetition_successes: rep_ok,
            repetition_rate: if cfg.repetitions == 0 { 0.0 } else { f64::from(rep_ok) / f64::from(cfg.repetitions) },
            collision_aborts: aborts,
        });
    }
    Ok(Report::Stats(StatsReport {
        seed: base.seed,
        alpha: cfg.alpha,
        passed: out.iter().all(|s| !s.below_bound),
        graphs: out,
    }))
}

pub fn cmd_complexity(cfg: &ComplexityConfig) -> Result<Report, HarnessError> {
    cfg.validate()?;
    let engine = EngineConfig { k: cfg.k, pulse_budget_const: cfg.pulse_budget_const, ..EngineConfig::default() };
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let spec = cfg.family.spec(n);
        let name = format!("{spec}@{}", cfg.seed);
        let g = generate(&spec, cfg.seed).map_err(|error| HarnessError::Graph { source_name: name.clone(), error })?;
        let e = run_experiment(&g, &engine, cfg.seed, cfg.trials)?;
        let a = Aggregate::of(&e.metrics);
        let (nf, mf) = (f64::from(n), g.m() as f64);
        rows.push(ComplexityRow {
            n,
            m: g.m(),
            graph: name,
            trials: cfg.trials,
            messages_mean: a.messages_mean,
            messages_max: a.messages_max,
            pulses_mean: a.pulses_mean,
            pulses_max: a.pulses_max,
            pulse_budget: engine.pulse_budget(n),
            messages_per_mn2: a.messages_max as f64 / (mf * nf * nf),
            pulses_per_n2: a.pulses_max as f64 / (nf * nf),
            collision_aborts: a.collision_aborts,
        });
    }
    let fit = |x: &dyn Fn(&ComplexityRow) -> f64, y: &dyn Fn(&ComplexityRow) -> f64| {
        let sxy: f64 = rows.iter().map(|r| x(r) * y(r)).sum();
        let sxx: f64 = rows.iter().map(|r| x(r) * x(r)).sum();
        sxy / sxx
    };
    let n2 = |r: &ComplexityRow| f64::from(r.n) * f64::from(r.n);
    let fitted_messages_per_mn2 = fit(&|r| r.m as f64 * n2(r), &|r| r.messages_mean);
    let fitted_pulses_per_n2 = fit(&n2, &|r| r.pulses_mean);
    Ok(Report::Complexity(ComplexityReport {
        family: cfg.family.to_string(),
        seed: cfg.seed,
        within_budget: rows.iter().all(|r| r.pulses_max <= r.pulse_budget),
        rows,
        fitted_messages_per_mn2,
        fitted_pulses_per_n2,
    }))
}
