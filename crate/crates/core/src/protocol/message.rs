use std::fmt;

use serde::{Deserialize, Serialize};

use super::rank::Rank;
use crate::graph::{NodeId, Weight};

/// Group identity. Vertices start in their own group; a merged group is named
/// after the rank of the edge whose contraction created it, which is unique
/// within a trial and can never alias a vertex id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupId {
    Vertex(NodeId),
    Merged(Rank),
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Vertex(v) => write!(f, "v{v}"),
            GroupId::Merged(r) => write!(f, "r{r}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MessageKind {
    #[serde(rename = "SET-RANK")]
    SetRank,
    #[serde(rename = "FIND-MAX-RANK")]
    FindMaxRank,
    #[serde(rename = "IS-ELIGIBLE-CONTRACT")]
    IsEligibleContract,
    #[serde(rename = "ELIGIBLE-CONTRACT")]
    EligibleContract,
    #[serde(rename = "SET-GROUP-ID")]
    SetGroupId,
    #[serde(rename = "SET-WEIGHT")]
    SetWeight,
    #[serde(rename = "GROUP-UPDATE")]
    GroupUpdate,
    #[serde(rename = "STOP")]
    Stop,
    #[serde(rename = "LOCAL-MC")]
    LocalMc,
    #[serde(rename = "MINCUT")]
    Mincut,
}

impl MessageKind {
    pub const ALL: [MessageKind; 10] = [
        MessageKind::SetRank,
        MessageKind::FindMaxRank,
        MessageKind::IsEligibleContract,
        MessageKind::EligibleContract,
        MessageKind::SetGroupId,
        MessageKind::SetWeight,
        MessageKind::GroupUpdate,
        MessageKind::Stop,
        MessageKind::LocalMc,
        MessageKind::Mincut,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::SetRank => "SET-RANK",
            MessageKind::FindMaxRank => "FIND-MAX-RANK",
            MessageKind::IsEligibleContract => "IS-ELIGIBLE-CONTRACT",
            MessageKind::EligibleContract => "ELIGIBLE-CONTRACT",
            MessageKind::SetGroupId => "SET-GROUP-ID",
            MessageKind::SetWeight => "SET-WEIGHT",
            MessageKind::GroupUpdate => "GROUP-UPDATE",
            MessageKind::Stop => "STOP",
            MessageKind::LocalMc => "LOCAL-MC",
            MessageKind::Mincut => "MINCUT",
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    SetRank(Rank),
    FindMaxRank(Rank),
    IsEligibleContract { owner: NodeId, g1: GroupId, g2: GroupId },
    EligibleContract { owner: NodeId, g1: GroupId },
    SetGroupId { g1: GroupId, g2: GroupId, new_group: GroupId },
    SetWeight,
    GroupUpdate(GroupId),
    Stop(bool),
    LocalMc { mcut: Weight, source: NodeId, dest: NodeId },
    Mincut { value: Weight, source: NodeId },
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::SetRank(_) => MessageKind::SetRank,
            Payload::FindMaxRank(_) => MessageKind::FindMaxRank,
            Payload::IsEligibleContract { .. } => MessageKind::IsEligibleContract,
            Payload::EligibleContract { .. } => MessageKind::EligibleContract,
            Payload::SetGroupId { .. } => MessageKind::SetGroupId,
            Payload::SetWeight => MessageKind::SetWeight,
            Payload::GroupUpdate(_) => MessageKind::GroupUpdate,
            Payload::Stop(_) => MessageKind::Stop,
            Payload::LocalMc { .. } => MessageKind::LocalMc,
            Payload::Mincut { .. } => MessageKind::Mincut,
        }
    }
}

/// Rendered without spaces so a trace line splits into exactly five fields.
impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::SetRank(r) | Payload::FindMaxRank(r) => write!(f, "rank={r}"),
            Payload::IsEligibleContract { owner, g1, g2 } => write!(f, "owner={owner},g1={g1},g2={g2}"),
            Payload::EligibleContract { owner, g1 } => write!(f, "owner={owner},g1={g1}"),
            Payload::SetGroupId { g1, g2, new_group } => write!(f, "g1={g1},g2={g2},new={new_group}"),
            Payload::SetWeight => f.write_str("-"),
            Payload::GroupUpdate(g) => write!(f, "group={g}"),
            Payload::Stop(t) => write!(f, "stop={t}"),
            Payload::LocalMc { mcut, source, dest } => write!(f, "mcut={mcut},src={source},dst={dest}"),
            Payload::Mincut { value, source } => write!(f, "value={value},src={source}"),
        }
    }
}

/// Position in the trial schedule. Only messages stamped with the current tag
/// may be delivered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhaseTag {
    pub trial: u64,
    pub iteration: u32,
    pub phase: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Message {
    pub tag: PhaseTag,
    pub sender_group: GroupId,
    pub payload: Payload,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub src: NodeId,
    pub dst: NodeId,
    pub msg: Message,
}

impl Envelope {
    /// `kind src dst payload`; the engine prefixes the send pulse.
    pub fn trace_fields(&self) -> String {
        format!("{} {} {} {}", self.msg.payload.kind(), self.src, self.dst, self.msg.payload)
    }
}
