use serde::{Deserialize, Serialize};

use super::{run_trial_with, CutResult, EngineConfig, EngineError, TrialMetrics};
use crate::graph::{Graph, Weight};

/// A trial attempt thrown away because two live edges drew the same rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbortRecord {
    pub trial: u64,
    pub attempt: u32,
    pub iteration: u32,
    pub value: u128,
}

#[derive(Clone, Debug)]
pub struct Experiment {
    /// Smallest cut found; ties go to the earliest trial.
    pub best: CutResult,
    /// Cut value of every trial, in trial order.
    pub values: Vec<Weight>,
    pub metrics: Vec<TrialMetrics>,
    pub aborts: Vec<AbortRecord>,
}

impl Experiment {
    pub fn trials(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn messages_total(&self) -> u64 {
        self.metrics.iter().map(|m| m.messages_total).sum()
    }

    pub fn pulses_total(&self) -> u64 {
        self.metrics.iter().map(|m| m.pulses).sum()
    }
}

/// `ceil(n^2 ln n)`, at least one.
pub fn default_trials(n: u32) -> u64 {
    let n = f64::from(n);
    ((n * n * n.ln()).ceil() as u64).max(1)
}

/// Runs `trials` independent trials (trial indices `0..trials`) and keeps the best.
pub fn run_experiment(graph: &Graph, cfg: &EngineConfig, seed: u64, trials: u64) -> Result<Experiment, EngineError> {
    if trials == 0 {
        return Err(EngineError::Config("at least one trial is required".into()));
    }
    let mut best: Option<CutResult> = None;
    let mut values = Vec::with_capacity(trials as usize);
    let mut metrics = Vec::with_capacity(trials as usize);
    let mut aborts = Vec::new();
    for trial in 0..trials {
        let result = run_trial_with(graph, cfg, seed, trial, |a| aborts.push(a))?;
        values.push(result.value);
        metrics.push(result.metrics.clone());
        log::debug!("trial {trial}: cut {} after {} pulses", result.value, result.metrics.pulses);
        if best.as_ref().is_none_or(|b| result.value < b.value) {
            best = Some(result);
        }
    }
    Ok(Experiment { best: best.expect("at least one trial ran"), values, metrics, aborts })
}
