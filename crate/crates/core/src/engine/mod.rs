//! Lockstep network simulator.
//!
//! A [`Network`] owns one [`NodeState`] per vertex and a single global pulse
//! clock. A message sent during pulse `t` is delivered at pulse `t + 1`,
//! sorted by `(src, dst)`, and every node steps exactly once per pulse in
//! ascending id order. Phases only change at pulse boundaries where nothing is
//! in flight, and the engine checks the protocol's invariants there.

mod experiment;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use experiment::{default_trials, run_experiment, AbortRecord, Experiment};

use crate::graph::{Edge, Graph, NodeId, Weight};
use crate::oracles::Bipartition;
use crate::protocol::{
    rank_upper, reduce_schedule, Envelope, GroupId, Message, MessageKind, NodeEvent, NodeRng, NodeState, Outbox,
    Phase, PhaseCtx, PhaseName, PhaseTag, ProtocolError, Rank, RankDraw, Status, MIN_RANK_EXPONENT,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error("pulse {pulse}: {source}")]
    Protocol { pulse: u64, source: ProtocolError },
    #[error("pulse {pulse}: message from {src} to {dst} is not on a graph edge")]
    NonEdge { pulse: u64, src: NodeId, dst: NodeId },
    #[error("pulse {pulse}: node {node} sent during silent phase {phase:?}")]
    SilentPhaseSend { pulse: u64, node: NodeId, phase: PhaseName },
    #[error("pulse {pulse}: message {src}->{dst} tagged {got:?} delivered in {expected:?}")]
    StaleMessage { pulse: u64, src: NodeId, dst: NodeId, expected: PhaseTag, got: PhaseTag },
    #[error("phase {phase:?} ended with {in_flight} messages still in flight")]
    NotQuiescent { phase: PhaseName, in_flight: usize },
    #[error("pulse budget of {budget} exceeded")]
    PulseBudgetExceeded { budget: u64 },
    #[error("pulse {pulse}: invariant violated: {what}")]
    Invariant { pulse: u64, what: String },
    #[error("rank collision persisted through {attempts} attempts")]
    CollisionRetriesExhausted { attempts: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Rank values are drawn from `1..=m^k`.
    pub k: u32,
    /// Pulse budget is `pulse_budget_const * n^2`.
    pub pulse_budget_const: u64,
    /// Shuffle each node's inbox with this seed instead of `(src, dst)` order.
    pub shuffle_seed: Option<u64>,
    /// Keep a per-message trace.
    pub record_trace: bool,
    /// Attempts per trial before a rank collision becomes an error.
    pub max_attempts: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { k: MIN_RANK_EXPONENT, pulse_budget_const: 20, shuffle_seed: None, record_trace: false, max_attempts: 64 }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.k < MIN_RANK_EXPONENT {
            return Err(EngineError::Config(format!("k must be >= {MIN_RANK_EXPONENT}, got {}", self.k)));
        }
        if self.pulse_budget_const == 0 {
            return Err(EngineError::Config("pulse budget constant must be positive".into()));
        }
        if self.max_attempts == 0 {
            return Err(EngineError::Config("max_attempts must be positive".into()));
        }
        Ok(())
    }

    pub fn pulse_budget(&self, n: u32) -> u64 {
        self.pulse_budget_const.saturating_mul(u64::from(n) * u64::from(n))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub trial_index: u64,
    /// Attempt that completed; earlier attempts hit rank collisions.
    pub attempt: u32,
    pub messages_total: u64,
    pub messages_by_kind: BTreeMap<MessageKind, u64>,
    pub pulses: u64,
    pub contractions: u32,
    pub iterations: u32,
    pub collision_aborts: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutResult {
    pub trial: u64,
    pub value: Weight,
    /// Node `n`'s accumulator before halving: twice the cut value.
    pub accumulator: Weight,
    /// Final group id of each vertex, index `v - 1`.
    pub groups: Vec<GroupId>,
    pub partition: Bipartition,
    pub cut_edges: Vec<Edge>,
    /// Each node's own list of neighbors across the cut, index `v - 1`.
    pub incident_cut_edges: Vec<Vec<NodeId>>,
    /// Owner-reported contractions as `(owner, partner)`.
    pub contractions: Vec<(NodeId, NodeId)>,
    pub metrics: TrialMetrics,
    pub trace: Option<Vec<String>>,
}

impl CutResult {
    /// Everything except metrics and trace, which legitimately depend on
    /// intra-pulse delivery order.
    pub fn same_outcome(&self, other: &CutResult) -> bool {
        self.value == other.value
            && self.groups == other.groups
            && self.partition == other.partition
            && self.cut_edges == other.cut_edges
            && self.incident_cut_edges == other.incident_cut_edges
            && self.contractions == other.contractions
    }
}

/// How one attempt ended.
#[derive(Clone, Debug)]
pub enum Attempt {
    Completed(Box<CutResult>),
    /// Two live edges drew the same rank value in `iteration`.
    Collision { iteration: u32, value: u128 },
}

pub struct Network<'g> {
    graph: &'g Graph,
    nodes: Vec<NodeState>,
    draws: Vec<Box<dyn RankDraw>>,
    in_flight: Vec<Envelope>,
    pulse: u64,
    budget: u64,
    rank_upper: u128,
    tag: PhaseTag,
    phase: Phase,
    offset: u64,
    shuffler: Option<ChaCha8Rng>,
    metrics: TrialMetrics,
    trace: Option<Vec<String>>,
    contractions: Vec<(NodeId, NodeId)>,
    last_delivery: Option<u64>,
    outbox: Outbox,
}

impl<'g> Network<'g> {
    pub fn new(graph: &'g Graph, cfg: &EngineConfig, seed: u64, trial: u64, attempt: u32) -> Result<Self, EngineError> {
        let draws = graph
            .vertices()
            .map(|v| Box::new(NodeRng::new(seed, trial, attempt, v)) as Box<dyn RankDraw>)
            .collect();
        Self::with_draws(graph, cfg, trial, attempt, draws)
    }

    /// Like [`Network::new`] but with caller-supplied rank sources, one per
    /// vertex in id order.
    pub fn with_draws(
        graph: &'g Graph,
        cfg: &EngineConfig,
        trial: u64,
        attempt: u32,
        draws: Vec<Box<dyn RankDraw>>,
    ) -> Result<Self, EngineError> {
        cfg.validate()?;
        if draws.len() != graph.n() as usize {
            return Err(EngineError::Config(format!("{} rank sources for {} vertices", draws.len(), graph.n())));
        }
        let rank_upper = rank_upper(graph.m(), cfg.k)
            .ok_or_else(|| EngineError::Config(format!("m^k overflows the rank width for m = {}", graph.m())))?;
        Ok(Network {
            graph,
            nodes: graph.vertices().map(|v| NodeState::for_graph(graph, v)).collect(),
            draws,
            in_flight: Vec::new(),
            pulse: 0,
            budget: cfg.pulse_budget(graph.n()),
            rank_upper,
            tag: PhaseTag { trial, iteration: 0, phase: 0 },
            phase: Phase::LocalMaxRank,
            offset: 0,
            shuffler: cfg
                .shuffle_seed
                .map(|s| ChaCha8Rng::seed_from_u64(s ^ trial.rotate_left(17) ^ u64::from(attempt))),
            metrics: TrialMetrics { trial_index: trial, attempt, ..Default::default() },
            trace: cfg.record_trace.then(Vec::new),
            contractions: Vec::new(),
            last_delivery: None,
            outbox: Outbox::default(),
        })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn node(&self, v: NodeId) -> &NodeState {
        &self.nodes[v as usize - 1]
    }

    pub fn node_mut(&mut self, v: NodeId) -> &mut NodeState {
        &mut self.nodes[v as usize - 1]
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn pulse(&self) -> u64 {
        self.pulse
    }

    pub fn metrics(&self) -> &TrialMetrics {
        &self.metrics
    }

    pub fn trace(&self) -> Option<&[String]> {
        self.trace.as_deref()
    }

    pub fn in_flight(&self) -> &[Envelope] {
        &self.in_flight
    }

    pub fn contractions(&self) -> &[(NodeId, NodeId)] {
        &self.contractions
    }

    /// Offset within the last phase of its final delivery, if anything was delivered.
    pub fn last_delivery(&self) -> Option<u64> {
        self.last_delivery
    }

    /// Puts a message on the wire as if `src` had sent it during the previous pulse.
    pub fn inject(&mut self, src: NodeId, dst: NodeId, payload: crate::protocol::Payload) {
        let sender_group = self.node(src).g;
        self.in_flight.push(Envelope { src, dst, msg: Message { tag: self.tag, sender_group, payload } });
    }

    /// Switches to `phase` without running it. Fails if messages are still in flight.
    pub fn begin_phase(&mut self, phase: Phase) -> Result<(), EngineError> {
        if !self.in_flight.is_empty() {
            return Err(EngineError::NotQuiescent { phase: self.phase.name(), in_flight: self.in_flight.len() });
        }
        self.tag.phase += 1;
        self.phase = phase;
        self.offset = 0;
        self.last_delivery = None;
        Ok(())
    }

    /// Delivers everything in flight, steps every node once, and queues what
    /// they sent for the next pulse.
    pub fn run_pulse(&mut self) -> Result<(), EngineError> {
        let pulse = self.pulse;
        let mut delivered = std::mem::take(&mut self.in_flight);
        delivered.sort_by_key(|e| (e.src, e.dst));
        let mut inboxes: Vec<Vec<(NodeId, Message)>> = vec![Vec::new(); self.nodes.len()];
        for env in &delivered {
            if env.msg.tag != self.tag {
                return Err(EngineError::StaleMessage {
                    pulse,
                    src: env.src,
                    dst: env.dst,
                    expected: self.tag,
                    got: env.msg.tag,
                });
            }
            inboxes[env.dst as usize - 1].push((env.src, env.msg));
        }
        if let Some(rng) = self.shuffler.as_mut() {
            inboxes.iter_mut().for_each(|inbox| inbox.shuffle(rng));
        }
        if !delivered.is_empty() {
            self.last_delivery = Some(self.offset);
        }

        let ctx = PhaseCtx { tag: self.tag, phase: self.phase, offset: self.offset, n: self.graph.n(), rank_upper: self.rank_upper };
        for (i, inbox) in inboxes.iter().enumerate() {
            let id = i as NodeId + 1;
            self.outbox.clear();
            self.nodes[i]
                .step(&ctx, inbox, self.draws[i].as_mut(), &mut self.outbox)
                .map_err(|source| EngineError::Protocol { pulse, source })?;
            for (dst, msg) in self.outbox.messages.drain(..) {
                if self.phase.is_silent() {
                    return Err(EngineError::SilentPhaseSend { pulse, node: id, phase: self.phase.name() });
                }
                if self.graph.weight(id, dst).is_none() {
                    return Err(EngineError::NonEdge { pulse, src: id, dst });
                }
                let env = Envelope { src: id, dst, msg };
                self.metrics.messages_total += 1;
                *self.metrics.messages_by_kind.entry(msg.payload.kind()).or_default() += 1;
                if let Some(trace) = self.trace.as_mut() {
                    trace.push(format!("{pulse} {}", env.trace_fields()));
                }
                self.in_flight.push(env);
            }
            for event in self.outbox.events.drain(..) {
                let NodeEvent::Contracted { owner, partner, .. } = event;
                self.contractions.push((owner, partner));
                self.metrics.contractions += 1;
            }
        }

        self.pulse += 1;
        self.offset += 1;
        self.metrics.pulses = self.pulse;
        if self.pulse > self.budget {
            return Err(EngineError::PulseBudgetExceeded { budget: self.budget });
        }
        Ok(())
    }

    /// Runs `phase` for its full pulse budget and checks it went quiet.
    pub fn run_phase(&mut self, phase: Phase) -> Result<(), EngineError> {
        self.begin_phase(phase)?;
        for _ in 0..phase.budget(self.graph.n()) {
            self.run_pulse()?;
        }
        if !self.in_flight.is_empty() {
            return Err(EngineError::NotQuiescent { phase: phase.name(), in_flight: self.in_flight.len() });
        }
        Ok(())
    }

    fn violation(&self, what: impl Into<String>) -> EngineError {
        EngineError::Invariant { pulse: self.pulse, what: what.into() }
    }

    fn group_count(&self) -> usize {
        let mut groups: Vec<GroupId> = self.nodes.iter().map(|s| s.g).collect();
        groups.sort_unstable();
        groups.dedup();
        groups.len()
    }

    /// After rank assignment: both endpoints agree, dead edges have rank 0,
    /// live ranks lie in `1..=m^k`. Returns a colliding value if two live
    /// edges drew the same one.
    fn check_ranks(&self) -> Result<Option<u128>, EngineError> {
        let mut values = Vec::new();
        for e in self.graph.edges() {
            let (a, b) = (self.node(e.u), self.node(e.v));
            let (ra, rb) = (a.rank(e.v).unwrap(), b.rank(e.u).unwrap());
            if ra != rb {
                return Err(self.violation(format!("edge ({}, {}) ranked {ra} and {rb}", e.u, e.v)));
            }
            let dead = a.weight(e.v) == Some(0);
            if dead != ra.is_zero() {
                return Err(self.violation(format!("edge ({}, {}) rank {ra} disagrees with weight", e.u, e.v)));
            }
            if !dead {
                if ra.value > self.rank_upper || ra != Rank::new(ra.value, e.u, e.v) {
                    return Err(self.violation(format!("edge ({}, {}) has malformed rank {ra}", e.u, e.v)));
                }
                values.push(ra.value);
            }
        }
        values.sort_unstable();
        Ok(values.windows(2).find(|w| w[0] == w[1]).map(|w| w[0]))
    }

    fn check_global_max(&self) -> Result<(), EngineError> {
        let top = self.nodes.iter().flat_map(|s| s.links.iter().map(|l| l.rank)).max().unwrap_or(Rank::ZERO);
        if let Some(s) = self.nodes.iter().find(|s| s.maxrank != top) {
            return Err(self.violation(format!("node {} holds maxrank {} not {top}", s.id, s.maxrank)));
        }
        Ok(())
    }

    /// Weight symmetry, `weight == 0` iff same group, accurate neighbor group
    /// tables, status consistency, and zero-weight connectivity inside groups.
    pub fn check_coherence(&self) -> Result<(), EngineError> {
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in self.graph.edges() {
            let (a, b) = (self.node(e.u), self.node(e.v));
            let (wa, wb) = (a.weight(e.v).unwrap(), b.weight(e.u).unwrap());
            if wa != wb {
                return Err(self.violation(format!("edge ({}, {}) weights {wa} / {wb}", e.u, e.v)));
            }
            if (wa == 0) != (a.g == b.g) {
                return Err(self.violation(format!(
                    "edge ({}, {}) weight {wa} with groups {} / {}",
                    e.u, e.v, a.g, b.g
                )));
            }
            if wa != 0 && wa != e.w {
                return Err(self.violation(format!("edge ({}, {}) weight changed to {wa}", e.u, e.v)));
            }
            if a.neighbor_group(e.v) != Some(b.g) || b.neighbor_group(e.u) != Some(a.g) {
                return Err(self.violation(format!("stale neighbor group across ({}, {})", e.u, e.v)));
            }
            if wa == 0 {
                let (ra, rb) = (root(&mut parent, e.u as usize - 1), root(&mut parent, e.v as usize - 1));
                parent[ra] = rb;
            }
        }
        for s in &self.nodes {
            let dead = s.links.iter().all(|l| l.weight == 0);
            if dead != (s.status == Status::Inactive) {
                return Err(self.violation(format!("node {} status {:?} with dead = {dead}", s.id, s.status)));
            }
        }
        let components = (0..parent.len()).filter(|&i| root(&mut parent, i) == i).count();
        if components != self.group_count() {
            return Err(self.violation("a group is not connected through contracted edges"));
        }
        Ok(())
    }

    /// Runs one pass of the contraction loop. Returns `Ok(None)` when every
    /// node agreed to stop, `Ok(Some(value))` on a rank collision.
    fn run_iteration(&mut self) -> Result<Option<Option<u128>>, EngineError> {
        self.tag.phase = 0;
        self.run_phase(Phase::AssignRank)?;
        if let Some(value) = self.check_ranks()? {
            return Ok(Some(Some(value)));
        }
        self.run_phase(Phase::LocalMaxRank)?;
        self.run_phase(Phase::GlobalMaxRank)?;
        self.check_global_max()?;

        let groups_before = self.group_count();
        let contracted_before = self.contractions.len();
        self.run_phase(Phase::Contract)?;
        let fired = self.contractions.len() - contracted_before;
        let expected = usize::from(groups_before > 2);
        if fired != expected {
            return Err(self.violation(format!("{fired} owners contracted with {groups_before} groups")));
        }
        if self.group_count() != groups_before - fired {
            return Err(self.violation("contraction did not merge exactly two groups"));
        }
        self.check_coherence()?;

        self.run_phase(Phase::Termination)?;
        let stops = self.nodes.iter().filter(|s| s.stop).count();
        if stops != 0 && stops != self.nodes.len() {
            return Err(self.violation(format!("{stops} of {} nodes voted to stop", self.nodes.len())));
        }
        if (stops != 0) != (fired == 0) {
            return Err(self.violation("stop consensus disagrees with the contraction count"));
        }
        self.metrics.iterations += 1;
        Ok((stops == 0).then_some(None))
    }

    /// Local sums, doubling reduction to node `n`, halving and broadcast.
    /// Returns the doubled accumulator seen at node `n`.
    pub fn run_mincut_phases(&mut self) -> Result<Weight, EngineError> {
        let n = self.graph.n();
        self.tag.phase = 0;
        self.run_phase(Phase::LocalMc)?;
        for slot in reduce_schedule(n) {
            self.run_phase(Phase::ReduceMc(slot))?;
        }
        let accumulator = self.node(n).mc;
        self.run_phase(Phase::BroadcastMc)?;
        Ok(accumulator)
    }

    /// Runs a whole trial attempt on fresh node state.
    pub fn run(mut self) -> Result<Attempt, EngineError> {
        self.check_coherence()?;
        loop {
            match self.run_iteration()? {
                Some(Some(value)) => {
                    return Ok(Attempt::Collision { iteration: self.tag.iteration, value });
                }
                Some(None) => self.tag.iteration += 1,
                None => break,
            }
        }
        self.tag.iteration += 1;
        let accumulator = self.run_mincut_phases()?;
        self.finish(accumulator).map(|r| Attempt::Completed(Box::new(r)))
    }

    fn finish(self, accumulator: Weight) -> Result<CutResult, EngineError> {
        let groups: Vec<GroupId> = self.nodes.iter().map(|s| s.g).collect();
        let partition = Bipartition::from_labels(&groups)
            .ok_or_else(|| self.violation("trial did not end with exactly two groups"))?;
        let cut_edges: Vec<Edge> = self
            .graph
            .edges()
            .iter()
            .filter(|e| groups[e.u as usize - 1] != groups[e.v as usize - 1])
            .copied()
            .collect();
        let crossing: Weight = cut_edges.iter().map(|e| e.w).sum();
        if accumulator != 2 * crossing {
            return Err(self.violation(format!("accumulator {accumulator} is not twice the crossing weight {crossing}")));
        }
        if let Some(s) = self.nodes.iter().find(|s| s.mc != crossing) {
            return Err(self.violation(format!("node {} reports cut {} not {crossing}", s.id, s.mc)));
        }
        let incident_cut_edges: Vec<Vec<NodeId>> = self.nodes.iter().map(NodeState::incident_cut_edges).collect();
        for (i, mine) in incident_cut_edges.iter().enumerate() {
            let v = i as NodeId + 1;
            let truth: Vec<NodeId> = cut_edges
                .iter()
                .filter_map(|e| match (e.u == v, e.v == v) {
                    (true, _) => Some(e.v),
                    (_, true) => Some(e.u),
                    _ => None,
                })
                .collect();
            let mut mine = mine.clone();
            mine.sort_unstable();
            let mut truth = truth;
            truth.sort_unstable();
            if mine != truth {
                return Err(self.violation(format!("node {v} lists cut edges {mine:?}, expected {truth:?}")));
            }
        }
        Ok(CutResult {
            trial: self.tag.trial,
            value: crossing,
            accumulator,
            groups,
            partition,
            cut_edges,
            incident_cut_edges,
            contractions: self.contractions,
            metrics: self.metrics,
            trace: self.trace,
        })
    }
}

/// One trial on `graph`, re-drawing all ranks after a collision. The returned
/// metrics count the aborted attempts; `on_abort` sees each one.
pub fn run_trial_with(
    graph: &Graph,
    cfg: &EngineConfig,
    seed: u64,
    trial: u64,
    mut on_abort: impl FnMut(AbortRecord),
) -> Result<CutResult, EngineError> {
    for attempt in 0..cfg.max_attempts {
        match Network::new(graph, cfg, seed, trial, attempt)?.run()? {
            Attempt::Completed(mut result) => {
                result.metrics.collision_aborts = attempt;
                return Ok(*result);
            }
            Attempt::Collision { iteration, value } => {
                let record = AbortRecord { trial, attempt, iteration, value };
                log::warn!("trial {trial} attempt {attempt}: rank value {value} drawn twice in iteration {iteration}, re-drawing");
                on_abort(record);
            }
        }
    }
    Err(EngineError::CollisionRetriesExhausted { attempts: cfg.max_attempts })
}

pub fn run_trial(graph: &Graph, cfg: &EngineConfig, seed: u64, trial: u64) -> Result<CutResult, EngineError> {
    run_trial_with(graph, cfg, seed, trial, |_| {})
}
