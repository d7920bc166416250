//! Centralized reference answers used to check the distributed protocol.
//!
//! None of these share code with the protocol's contraction logic. The
//! sequential contraction replay shares only the per-node rank streams, which
//! is what makes "same draws, same contractions" a meaningful comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId, Weight};
use crate::protocol::{NodeRng, Rank, RankDraw};

/// Largest graph the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_N: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("brute force supports n <= {BRUTE_FORCE_MAX_N}, got {n}")]
    TooLarge { n: u32 },
    #[error("bipartition has an empty side")]
    EmptySide,
    #[error("bipartition covers {got} vertices, graph has {n}")]
    SizeMismatch { got: usize, n: u32 },
    #[error("no rank for edge ({hi}, {lo}) in iteration {iteration}")]
    MissingRank { iteration: u32, hi: NodeId, lo: NodeId },
    #[error("rank source exhausted")]
    Exhausted,
}

/// Two-sided vertex split. Stored normalized so vertex 1 is on side `false`;
/// equal splits compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    side: Vec<bool>,
}

impl Bipartition {
    /// `side[i]` is the side of vertex `i + 1`.
    pub fn new(mut side: Vec<bool>) -> Result<Self, OracleError> {
        if side.first().copied().unwrap_or(false) {
            side.iter_mut().for_each(|s| *s = !*s);
        }
        if !side.iter().any(|&s| s) {
            return Err(OracleError::EmptySide);
        }
        Ok(Bipartition { side })
    }

    /// Splits by label; `None` unless there are exactly two distinct labels.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Option<Self> {
        let first = labels.first()?;
        let other = labels.iter().find(|l| *l != first)?;
        if labels.iter().any(|l| l != first && l != other) {
            return None;
        }
        Self::new(labels.iter().map(|l| l != first).collect()).ok()
    }

    pub fn side_of(&self, v: NodeId) -> bool {
        self.side[v as usize - 1]
    }

    pub fn len(&self) -> usize {
        self.side.len()
    }

    pub fn is_empty(&self) -> bool {
        self.side.is_empty()
    }

    /// Vertices on the side not containing vertex 1.
    pub fn far_side(&self) -> Vec<NodeId> {
        (1..=self.side.len() as NodeId).filter(|&v| self.side_of(v)).collect()
    }
}

pub fn partition_cut_weight(g: &Graph, p: &Bipartition) -> Result<Weight, OracleError> {
    if p.len() != g.n() as usize {
        return Err(OracleError::SizeMismatch { got: p.len(), n: g.n() });
    }
    Ok(g.edges()
        .iter()
        .filter(|e| p.side_of(e.u) != p.side_of(e.v))
        .map(|e| e.w)
        .sum())
}

fn for_each_cut(g: &Graph, mut visit: impl FnMut(u32, Weight)) -> Result<(), OracleError> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(OracleError::TooLarge { n });
    }
    // vertex 1 stays on side 0; bit i of the mask puts vertex i + 2 on side 1
    let edges: Vec<(u32, u32, Weight)> = g.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
    let bit = |mask: u32, v: u32| if v == 1 { false } else { mask >> (v - 2) & 1 == 1 };
    for mask in 1..(1u32 << (n - 1)) {
        let cut = edges
            .iter()
            .filter(|&&(u, v, _)| bit(mask, u) != bit(mask, v))
            .map(|&(_, _, w)| w)
            .sum();
        visit(mask, cut);
    }
    Ok(())
}

fn mask_to_partition(n: u32, mask: u32) -> Bipartition {
    let side = (1..=n).map(|v| v != 1 && mask >> (v - 2) & 1 == 1).collect();
    Bipartition::new(side).expect("non-zero mask")
}

/// Exact minimum cut by enumerating all `2^(n-1) - 1` bipartitions.
pub fn brute_force_mincut(g: &Graph) -> Result<(Weight, Bipartition), OracleError> {
    let mut best = (Weight::MAX, 0);
    for_each_cut(g, |mask, cut| {
        if cut < best.0 {
            best = (cut, mask);
        }
    })?;
    Ok((best.0, mask_to_partition(g.n(), best.1)))
}

/// Minimum cut value and how many bipartitions attain it.
pub fn min_cut_multiplicity(g: &Graph) -> Result<(Weight, usize), OracleError> {
    let mut best = (Weight::MAX, 0);
    for_each_cut(g, |_, cut| match cut.cmp(&best.0) {
        std::cmp::Ordering::Less => best = (cut, 1),
        std::cmp::Ordering::Equal => best.1 += 1,
        std::cmp::Ordering::Greater => {}
    })?;
    Ok(best)
}

/// Stoer–Wagner on a dense adjacency matrix, `O(n^3)`.
pub fn stoer_wagner_mincut(g: &Graph) -> Weight {
    let n = g.n() as usize;
    let mut w = vec![vec![0 as Weight; n]; n];
    for e in g.edges() {
        let (a, b) = (e.u as usize - 1, e.v as usize - 1);
        w[a][b] += e.w;
        w[b][a] += e.w;
    }
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best = Weight::MAX;
    while alive.len() > 1 {
        // maximum adjacency order over the surviving super-vertices
        let mut added = vec![false; n];
        let mut key = vec![0 as Weight; n];
        let mut prev = alive[0];
        let mut last = alive[0];
        for round in 0..alive.len() {
            let next = *alive
                .iter()
                .filter(|&&v| !added[v])
                .max_by(|&&a, &&b| key[a].cmp(&key[b]).then(b.cmp(&a)))
                .expect("unvisited vertex");
            added[next] = true;
            if round == alive.len() - 1 {
                best = best.min(key[next]);
            }
            prev = last;
            last = next;
            for &v in &alive {
                if !added[v] {
                    key[v] += w[next][v];
                }
            }
        }
        // merge the last two vertices of the phase
        for &v in &alive {
            w[prev][v] += w[last][v];
            w[v][prev] = w[prev][v];
        }
        w[prev][prev] = 0;
        alive.retain(|&v| v != last);
    }
    best
}

/// Per-iteration ranks for the sequential replay.
pub trait RankSchedule {
    /// One rank per entry of `active`, which lists the iteration's live edges
    /// as `(hi, lo)` sorted ascending.
    fn ranks(&mut self, iteration: u32, active: &[(NodeId, NodeId)]) -> Result<Vec<Rank>, OracleError>;
}

/// Replays the protocol's draws: edge `(hi, lo)` takes the next value from
/// node `hi`'s stream, and each node draws for its live lower edges in
/// ascending order.
pub struct SeededRanks {
    streams: Vec<NodeRng>,
    upper: u128,
}

impl SeededRanks {
    pub fn new(n: u32, upper: u128, seed: u64, trial: u64, attempt: u32) -> Self {
        SeededRanks {
            streams: (1..=n).map(|v| NodeRng::new(seed, trial, attempt, v)).collect(),
            upper,
        }
    }
}

impl RankSchedule for SeededRanks {
    fn ranks(&mut self, _iteration: u32, active: &[(NodeId, NodeId)]) -> Result<Vec<Rank>, OracleError> {
        active
            .iter()
            .map(|&(hi, lo)| {
                let value = self.streams[hi as usize - 1].draw(self.upper).ok_or(OracleError::Exhausted)?;
                Ok(Rank::new(value, hi, lo))
            })
            .collect()
    }
}

/// Explicit rank values per iteration, keyed by `(hi, lo)`.
#[derive(Clone, Debug, Default)]
pub struct TableRanks(pub Vec<BTreeMap<(NodeId, NodeId), u128>>);

impl RankSchedule for TableRanks {
    fn ranks(&mut self, iteration: u32, active: &[(NodeId, NodeId)]) -> Result<Vec<Rank>, OracleError> {
        let table = self.0.get(iteration as usize);
        active
            .iter()
            .map(|&(hi, lo)| {
                table
                    .and_then(|t| t.get(&(hi, lo)))
                    .map(|&v| Rank::new(v, hi, lo))
                    .ok_or(OracleError::MissingRank { iteration, hi, lo })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KargerTrace {
    pub value: Weight,
    pub partition: Bipartition,
    /// Contracted edges as `(hi, lo)`, in order.
    pub contractions: Vec<(NodeId, NodeId)>,
}

/// Sequential contraction: each iteration ranks the edges joining distinct
/// groups and merges the endpoints of the top-ranked one, until two groups
/// remain.
pub fn sequential_karger_trial(g: &Graph, schedule: &mut dyn RankSchedule) -> Result<KargerTrace, OracleError> {
    let n = g.n() as usize;
    let mut label: Vec<usize> = (0..=n).collect();
    let mut groups = n;
    let mut contractions = Vec::new();
    for iteration in 0.. {
        let active: Vec<(NodeId, NodeId)> = {
            let mut a: Vec<_> = g
                .edges()
                .iter()
                .filter(|e| label[e.u as usize] != label[e.v as usize])
                .map(|e| (e.v, e.u))
                .collect();
            a.sort_unstable();
            a
        };
        let ranks = schedule.ranks(iteration, &active)?;
        if groups <= 2 {
            break;
        }
        let top = ranks.into_iter().max().expect("connected graph with > 2 groups has a live edge");
        let (keep, gone) = (label[top.hi as usize], label[top.lo as usize]);
        label.iter_mut().filter(|l| **l == gone).for_each(|l| *l = keep);
        groups -= 1;
        contractions.push((top.hi, top.lo));
    }
    let partition = Bipartition::from_labels(&label[1..]).expect("exactly two groups");
    let value = partition_cut_weight(g, &partition)?;
    Ok(KargerTrace { value, partition, contractions })
}
