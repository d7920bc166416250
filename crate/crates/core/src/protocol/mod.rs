//! Per-node state machine for the synchronous contraction protocol.
//!
//! Every node runs the same [`NodeState::step`] once per pulse. A step sees the
//! current [`PhaseCtx`] and the messages delivered this pulse, mutates only its
//! own state, and appends outgoing messages to an [`Outbox`]. Nodes never read
//! each other's state; whatever a node knows about a neighbor arrived in a
//! message.
//!
//! One iteration of the contraction loop runs these phases in order:
//!
//! | phase            | pulses | what happens                                        |
//! |------------------|--------|-----------------------------------------------------|
//! | `AssignRank`     | 2      | higher endpoint draws each live edge's rank         |
//! | `LocalMaxRank`   | 1      | local maximum, no messages                          |
//! | `GlobalMaxRank`  | n      | maximum flooded until every node holds it           |
//! | `Contract`       | 3n     | owner of the max edge checks eligibility, contracts |
//! | `Termination`    | n      | `stop = false` flooded if anything contracted       |
//!
//! Once every node reports `stop`, exactly two groups remain and the cut value
//! is summed with `LocalMc`, `ReduceMc` (one n-pulse slot per sender of the
//! doubling schedule) and `BroadcastMc`.

mod message;
mod rank;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use message::{Envelope, GroupId, Message, MessageKind, Payload, PhaseTag};
pub use rank::{rank_upper, NodeRng, Rank, RankDraw, ScriptedDraws, MIN_RANK_EXPONENT};

use crate::graph::{Graph, NodeId, Weight};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("rank source exhausted at node {node}")]
    RankSourceExhausted { node: NodeId },
    #[error("node {node} got {kind} during {phase:?}")]
    UnexpectedMessage { node: NodeId, kind: MessageKind, phase: PhaseName },
    #[error("node {node} got a message from non-neighbor {from}")]
    UnknownNeighbor { node: NodeId, from: NodeId },
    #[error("doubled cut accumulator {value} at node {node} is odd")]
    OddAccumulator { node: NodeId, value: Weight },
    #[error("cut accumulator overflow at node {node}")]
    AccumulatorOverflow { node: NodeId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhaseName {
    AssignRank,
    LocalMaxRank,
    GlobalMaxRank,
    Contract,
    Termination,
    LocalMc,
    ReduceMc,
    BroadcastMc,
}

/// One sender slot of the doubling reduction: in step `step`, `sender`
/// floods its partial sum addressed to `dest`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReduceSlot {
    pub step: u32,
    pub sender: NodeId,
    pub dest: NodeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    AssignRank,
    LocalMaxRank,
    GlobalMaxRank,
    Contract,
    Termination,
    LocalMc,
    ReduceMc(ReduceSlot),
    BroadcastMc,
}

impl Phase {
    pub fn name(&self) -> PhaseName {
        match self {
            Phase::AssignRank => PhaseName::AssignRank,
            Phase::LocalMaxRank => PhaseName::LocalMaxRank,
            Phase::GlobalMaxRank => PhaseName::GlobalMaxRank,
            Phase::Contract => PhaseName::Contract,
            Phase::Termination => PhaseName::Termination,
            Phase::LocalMc => PhaseName::LocalMc,
            Phase::ReduceMc(_) => PhaseName::ReduceMc,
            Phase::BroadcastMc => PhaseName::BroadcastMc,
        }
    }

    /// Pulses allotted to the phase, trailing wait included.
    ///
    /// A flood forwarded at most once per node (or only on strict improvement)
    /// travels along simple paths, so its last delivery lands at offset
    /// `n - 1` at the latest. The contraction phase chains three such floods:
    /// eligibility query, eligibility reply, and the group-id update.
    pub fn budget(&self, n: u32) -> u64 {
        let n = u64::from(n);
        match self {
            Phase::AssignRank => 2,
            Phase::LocalMaxRank | Phase::LocalMc => 1,
            Phase::GlobalMaxRank | Phase::Termination | Phase::ReduceMc(_) | Phase::BroadcastMc => n,
            Phase::Contract => 3 * n,
        }
    }

    /// Phases in which no node may send.
    pub fn is_silent(&self) -> bool {
        matches!(self, Phase::LocalMaxRank | Phase::LocalMc)
    }

    fn accepts(&self, kind: MessageKind) -> bool {
        use MessageKind::*;
        match self {
            Phase::AssignRank => kind == SetRank,
            Phase::GlobalMaxRank => kind == FindMaxRank,
            Phase::Contract => matches!(
                kind,
                IsEligibleContract | EligibleContract | SetGroupId | SetWeight | GroupUpdate
            ),
            Phase::Termination => kind == Stop,
            Phase::ReduceMc(_) => kind == LocalMc,
            Phase::BroadcastMc => kind == Mincut,
            Phase::LocalMaxRank | Phase::LocalMc => false,
        }
    }
}

/// `ceil(log2 n)`, the number of doubling steps.
pub fn reduction_steps(n: u32) -> u32 {
    n.max(1).next_power_of_two().trailing_zeros()
}

/// Sender slots of the doubling reduction, in execution order: for step `i`,
/// nodes `2^(i-1), 2^(i-1) + 2^i, ...` up to `n - 1` each send to
/// `min(u + 2^(i-1), n)`.
pub fn reduce_schedule(n: u32) -> Vec<ReduceSlot> {
    let mut slots = Vec::new();
    for step in 1..=reduction_steps(n) {
        let half = 1u32 << (step - 1);
        let mut sender = half;
        while sender < n {
            slots.push(ReduceSlot { step, sender, dest: (sender + half).min(n) });
            sender += half << 1;
        }
    }
    slots
}

/// Static facts plus the phase a pulse belongs to.
#[derive(Clone, Copy, Debug)]
pub struct PhaseCtx {
    pub tag: PhaseTag,
    pub phase: Phase,
    /// Pulse index within the phase; 0 is the entry pulse.
    pub offset: u64,
    pub n: u32,
    pub rank_upper: u128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeEvent {
    /// The node contracted its maximum-rank edge to `partner` as owner.
    Contracted { owner: NodeId, partner: NodeId, group: GroupId },
}

#[derive(Debug, Default)]
pub struct Outbox {
    pub messages: Vec<(NodeId, Message)>,
    pub events: Vec<NodeEvent>,
}

impl Outbox {
    pub fn clear(&mut self) {
        self.messages.clear();
        self.events.clear();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Active,
    Inactive,
}

/// What a node knows about one incident edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub neighbor: NodeId,
    /// Original weight; restored at trial start.
    pub original: Weight,
    /// Current weight, 0 once both endpoints share a group.
    pub weight: Weight,
    pub rank: Rank,
    /// Last group id heard from the neighbor.
    pub group: GroupId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeState {
    pub id: NodeId,
    pub g: GroupId,
    /// Sorted by neighbor id.
    pub links: Vec<Link>,
    pub maxrank: Rank,
    pub status: Status,
    pub stop: bool,
    /// Floods already handled in the current phase.
    pub seen: BTreeSet<Payload>,
    pub mc: Weight,
}

impl NodeState {
    /// Fresh node with the given incident edges, already initialised for a trial.
    pub fn new(id: NodeId, neighbors: &[(NodeId, Weight)]) -> Self {
        let mut links: Vec<Link> = neighbors
            .iter()
            .map(|&(neighbor, w)| Link {
                neighbor,
                original: w,
                weight: w,
                rank: Rank::ZERO,
                group: GroupId::Vertex(neighbor),
            })
            .collect();
        links.sort_by_key(|l| l.neighbor);
        let mut node = NodeState {
            id,
            g: GroupId::Vertex(id),
            links,
            maxrank: Rank::ZERO,
            status: Status::Active,
            stop: true,
            seen: BTreeSet::new(),
            mc: 0,
        };
        node.init_trial();
        node
    }

    pub fn for_graph(g: &Graph, id: NodeId) -> Self {
        Self::new(id, g.neighbors(id))
    }

    /// Resets everything a previous trial may have changed.
    pub fn init_trial(&mut self) {
        self.g = GroupId::Vertex(self.id);
        for l in &mut self.links {
            l.weight = l.original;
            l.rank = Rank::ZERO;
            l.group = GroupId::Vertex(l.neighbor);
        }
        self.maxrank = Rank::ZERO;
        self.status = Status::Active;
        self.stop = true;
        self.seen.clear();
        self.mc = 0;
        self.check_active();
    }

    pub fn link(&self, v: NodeId) -> Option<&Link> {
        self.links
            .binary_search_by_key(&v, |l| l.neighbor)
            .ok()
            .map(|i| &self.links[i])
    }

    fn link_mut(&mut self, v: NodeId) -> Option<&mut Link> {
        self.links
            .binary_search_by_key(&v, |l| l.neighbor)
            .ok()
            .map(move |i| &mut self.links[i])
    }

    pub fn weight(&self, v: NodeId) -> Option<Weight> {
        self.link(v).map(|l| l.weight)
    }

    pub fn rank(&self, v: NodeId) -> Option<Rank> {
        self.link(v).map(|l| l.rank)
    }

    pub fn neighbor_group(&self, v: NodeId) -> Option<GroupId> {
        self.link(v).map(|l| l.group)
    }

    /// Neighbors across non-zero edges, i.e. this node's share of the cut.
    pub fn incident_cut_edges(&self) -> Vec<NodeId> {
        self.links.iter().filter(|l| l.weight != 0).map(|l| l.neighbor).collect()
    }

    pub fn step(
        &mut self,
        ctx: &PhaseCtx,
        inbox: &[(NodeId, Message)],
        draw: &mut dyn RankDraw,
        out: &mut Outbox,
    ) -> Result<(), ProtocolError> {
        if ctx.offset == 0 {
            self.seen.clear();
            self.enter(ctx, draw, out)?;
        }
        for (src, msg) in inbox {
            self.receive(ctx, *src, msg, out)?;
        }
        Ok(())
    }

    fn enter(&mut self, ctx: &PhaseCtx, draw: &mut dyn RankDraw, out: &mut Outbox) -> Result<(), ProtocolError> {
        match ctx.phase {
            Phase::AssignRank => self.assign_rank(ctx, draw, out)?,
            Phase::LocalMaxRank => self.find_local_maxrank(),
            Phase::GlobalMaxRank => self.start_global_maxrank(ctx, out),
            Phase::Contract => self.check_eligibility_and_contract(ctx, out),
            Phase::Termination => self.check_termination_status(ctx, out),
            Phase::LocalMc => self.find_local_mincut(),
            Phase::ReduceMc(slot) => self.start_reduce_slot(ctx, slot, out),
            Phase::BroadcastMc => self.start_broadcast(ctx, out)?,
        }
        Ok(())
    }

    fn send(&self, ctx: &PhaseCtx, out: &mut Outbox, dst: NodeId, payload: Payload) {
        out.messages.push((dst, Message { tag: ctx.tag, sender_group: self.g, payload }));
    }

    fn send_where(&self, ctx: &PhaseCtx, out: &mut Outbox, payload: Payload, keep: impl Fn(&Link) -> bool) {
        for l in self.links.iter().filter(|l| keep(l)) {
            self.send(ctx, out, l.neighbor, payload);
        }
    }

    fn check_active(&mut self) {
        if self.links.iter().all(|l| l.weight == 0) {
            self.status = Status::Inactive;
        }
    }

    /// Draws a rank for each live edge to a lower-numbered neighbor and tells
    /// that neighbor; dead edges get rank 0 without consuming a draw.
    pub fn assign_rank(&mut self, ctx: &PhaseCtx, draw: &mut dyn RankDraw, out: &mut Outbox) -> Result<(), ProtocolError> {
        for i in 0..self.links.len() {
            let l = self.links[i];
            if l.neighbor >= self.id {
                break;
            }
            let rank = if l.weight != 0 {
                let value = draw
                    .draw(ctx.rank_upper)
                    .ok_or(ProtocolError::RankSourceExhausted { node: self.id })?;
                Rank::new(value, self.id, l.neighbor)
            } else {
                Rank::ZERO
            };
            self.links[i].rank = rank;
            self.send(ctx, out, l.neighbor, Payload::SetRank(rank));
        }
        Ok(())
    }

    pub fn find_local_maxrank(&mut self) {
        self.maxrank = self.local_max().map_or(Rank::ZERO, |l| l.rank);
    }

    fn local_max(&self) -> Option<&Link> {
        self.links.iter().max_by_key(|l| l.rank)
    }

    fn start_global_maxrank(&mut self, ctx: &PhaseCtx, out: &mut Outbox) {
        self.send_where(ctx, out, Payload::FindMaxRank(self.maxrank), |_| true);
    }

    /// Neighbor `v` if this node owns the globally maximal edge `(self, v)`.
    fn owned_edge(&self) -> Option<NodeId> {
        let best = self.local_max()?;
        (!best.rank.is_zero() && best.rank == self.maxrank && self.id > best.neighbor).then_some(best.neighbor)
    }

    pub fn check_eligibility_and_contract(&mut self, ctx: &PhaseCtx, out: &mut Outbox) {
        self.stop = true;
        let Some(v) = self.owned_edge() else { return };
        let partner_group = self.neighbor_group(v).expect("owned edge has a link");
        let witness = self
            .links
            .iter()
            .any(|l| l.weight != 0 && l.neighbor != v && l.group != partner_group);
        if witness {
            self.stop = false;
            self.contract(ctx, out);
        } else {
            let query = Payload::IsEligibleContract { owner: self.id, g1: self.g, g2: partner_group };
            self.seen.insert(query);
            self.send_where(ctx, out, query, |_| true);
        }
    }

    /// Owner side of a contraction: kill the max edge, adopt the new group id
    /// and start the group-id flood through the old group and the partner.
    fn contract(&mut self, ctx: &PhaseCtx, out: &mut Outbox) {
        let Some(v) = self.owned_edge() else { return };
        let maxrank = self.maxrank;
        let partner_group = {
            let l = self.link_mut(v).expect("owned edge has a link");
            l.weight = 0;
            l.group
        };
        self.check_active();
        self.g = GroupId::Merged(maxrank);
        // the initiator's g' is already the new id, as in the original listing
        let announce = Payload::SetGroupId { g1: self.g, g2: partner_group, new_group: self.g };
        self.send_where(ctx, out, announce, |l| l.weight == 0);
        self.send_where(ctx, out, Payload::GroupUpdate(self.g), |l| l.weight != 0);
        out.events.push(NodeEvent::Contracted { owner: self.id, partner: v, group: self.g });
    }

    pub fn check_termination_status(&mut self, ctx: &PhaseCtx, out: &mut Outbox) {
        if !self.stop {
            self.seen.insert(Payload::Stop(false));
        }
        self.send_where(ctx, out, Payload::Stop(self.stop), |_| true);
    }

    pub fn find_local_mincut(&mut self) {
        self.mc = match self.status {
            Status::Active => self.links.iter().map(|l| l.weight).sum(),
            Status::Inactive => 0,
        };
    }

    fn start_reduce_slot(&mut self, ctx: &PhaseCtx, slot: ReduceSlot, out: &mut Outbox) {
        if self.id == slot.sender {
            let partial = Payload::LocalMc { mcut: self.mc, source: self.id, dest: slot.dest };
            self.seen.insert(partial);
            self.send_where(ctx, out, partial, |_| true);
        }
    }

    fn start_broadcast(&mut self, ctx: &PhaseCtx, out: &mut Outbox) -> Result<(), ProtocolError> {
        if self.id != ctx.n {
            return Ok(());
        }
        if !self.mc.is_multiple_of(2) {
            return Err(ProtocolError::OddAccumulator { node: self.id, value: self.mc });
        }
        self.mc /= 2;
        let result = Payload::Mincut { value: self.mc, source: self.id };
        self.seen.insert(result);
        self.send_where(ctx, out, result, |_| true);
        Ok(())
    }

    fn receive(&mut self, ctx: &PhaseCtx, src: NodeId, msg: &Message, out: &mut Outbox) -> Result<(), ProtocolError> {
        let kind = msg.payload.kind();
        if !ctx.phase.accepts(kind) {
            return Err(ProtocolError::UnexpectedMessage { node: self.id, kind, phase: ctx.phase.name() });
        }
        let at = self
            .links
            .binary_search_by_key(&src, |l| l.neighbor)
            .map_err(|_| ProtocolError::UnknownNeighbor { node: self.id, from: src })?;
        self.links[at].group = msg.sender_group;

        match msg.payload {
            Payload::SetRank(rank) => self.links[at].rank = rank,
            Payload::FindMaxRank(rank) => {
                if rank > self.maxrank {
                    self.maxrank = rank;
                    self.send_where(ctx, out, msg.payload, |l| l.neighbor != src);
                }
            }
            Payload::IsEligibleContract { owner, g1, g2 } => {
                if self.seen.insert(msg.payload) {
                    let witness = self
                        .links
                        .iter()
                        .any(|l| l.weight != 0 && l.group != g1 && l.group != g2);
                    if witness {
                        let reply = Payload::EligibleContract { owner, g1 };
                        self.seen.insert(reply);
                        self.send_where(ctx, out, reply, |l| l.weight == 0 || l.group == g1);
                    } else {
                        self.send_where(ctx, out, msg.payload, |l| l.weight == 0 && l.neighbor != src);
                    }
                }
            }
            Payload::EligibleContract { owner, g1 } => {
                if self.seen.insert(msg.payload) {
                    if self.id == owner {
                        self.stop = false;
                        self.contract(ctx, out);
                    } else {
                        self.send_where(ctx, out, msg.payload, |l| {
                            l.neighbor != src && (l.weight == 0 || l.group == g1)
                        });
                    }
                }
            }
            Payload::SetGroupId { g1, g2, new_group } => {
                if self.g != new_group {
                    self.links[at].weight = 0;
                    self.check_active();
                    self.g = new_group;
                    if self.status == Status::Active {
                        for i in 0..self.links.len() {
                            let l = self.links[i];
                            if l.weight != 0 && (l.group == g1 || l.group == g2 || l.group == new_group) {
                                self.links[i].weight = 0;
                                self.check_active();
                                self.send(ctx, out, l.neighbor, Payload::SetWeight);
                            }
                        }
                    }
                    self.send_where(ctx, out, msg.payload, |l| l.weight == 0);
                    // outside neighbors must learn the new id before the next eligibility check
                    self.send_where(ctx, out, Payload::GroupUpdate(new_group), |l| l.weight != 0);
                }
            }
            Payload::SetWeight => {
                self.links[at].weight = 0;
                self.check_active();
            }
            Payload::GroupUpdate(group) => self.links[at].group = group,
            Payload::Stop(t) => {
                if !t && self.seen.insert(msg.payload) {
                    self.stop = false;
                    self.send_where(ctx, out, msg.payload, |l| l.neighbor != src);
                }
            }
            Payload::LocalMc { mcut, dest, .. } => {
                if self.seen.insert(msg.payload) {
                    if self.id == dest {
                        self.mc = self
                            .mc
                            .checked_add(mcut)
                            .ok_or(ProtocolError::AccumulatorOverflow { node: self.id })?;
                    } else {
                        self.send_where(ctx, out, msg.payload, |l| l.neighbor != src);
                    }
                }
            }
            Payload::Mincut { value, .. } => {
                if self.seen.insert(msg.payload) {
                    self.mc = value;
                    self.send_where(ctx, out, msg.payload, |l| l.neighbor != src);
                }
            }
        }
        Ok(())
    }
}
