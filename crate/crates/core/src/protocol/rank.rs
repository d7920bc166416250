//! Edge ranks and the per-node random streams that draw them.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// Smallest exponent allowed for the rank range `1..=m^k`.
pub const MIN_RANK_EXPONENT: u32 = 5;

/// Random edge label. Ordered by value, then by `(hi, lo)` endpoint ids, so two
/// distinct edges never compare equal. [`Rank::ZERO`] marks a contracted edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rank {
    pub value: u128,
    pub hi: NodeId,
    pub lo: NodeId,
}

impl Rank {
    pub const ZERO: Rank = Rank { value: 0, hi: 0, lo: 0 };

    pub fn new(value: u128, a: NodeId, b: NodeId) -> Self {
        Rank { value, hi: a.max(b), lo: a.min(b) }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            f.write_str("0")
        } else {
            write!(f, "{}:{}:{}", self.value, self.hi, self.lo)
        }
    }
}

/// `m^k`, or `None` when it does not fit the rank width.
pub fn rank_upper(m: usize, k: u32) -> Option<u128> {
    (m as u128).checked_pow(k)
}

/// Source of uniform rank values in `1..=upper`. `None` means the source ran dry.
pub trait RankDraw {
    fn draw(&mut self, upper: u128) -> Option<u128>;
}

/// Deterministic stream owned by one node for one trial attempt.
#[derive(Clone, Debug)]
pub struct NodeRng(ChaCha8Rng);

impl NodeRng {
    pub fn new(seed: u64, trial: u64, attempt: u32, node: NodeId) -> Self {
        let mut h = splitmix64(seed);
        for word in [trial, u64::from(attempt), u64::from(node)] {
            h = splitmix64(h ^ splitmix64(word));
        }
        NodeRng(ChaCha8Rng::seed_from_u64(h))
    }
}

impl RankDraw for NodeRng {
    fn draw(&mut self, upper: u128) -> Option<u128> {
        (upper >= 1).then(|| self.0.random_range(1..=upper))
    }
}

/// Hands out a fixed list of values, then runs dry.
#[derive(Clone, Debug, Default)]
pub struct ScriptedDraws(VecDeque<u128>);

impl ScriptedDraws {
    pub fn new(values: impl IntoIterator<Item = u128>) -> Self {
        ScriptedDraws(values.into_iter().collect())
    }
}

impl RankDraw for ScriptedDraws {
    fn draw(&mut self, _upper: u128) -> Option<u128> {
        self.0.pop_front()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
