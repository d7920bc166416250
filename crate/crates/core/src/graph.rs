//! Weighted undirected graphs with contiguous 1-based vertex ids.
//!
//! A [`Graph`] is immutable once built and is always valid: ids are exactly
//! `1..=n`, there are no self-loops or parallel edges, every weight is a
//! positive integer and the graph is connected. Raw input goes through
//! [`EdgeList`] and [`validate`] first.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracles;

pub type NodeId = u32;
pub type Weight = u64;

/// An undirected edge stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub w: Weight,
}

impl Edge {
    pub fn new(a: NodeId, b: NodeId, w: Weight) -> Self {
        Edge { u: a.min(b), v: a.max(b), w }
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.u, self.v)
    }
}

/// One broken graph invariant.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("graph needs at least two vertices, got {n}")]
    TooFewVertices { n: u32 },
    #[error("vertex {vertex} outside 1..={n}")]
    VertexOutOfRange { vertex: u32, n: u32 },
    #[error("self-loop on vertex {vertex}")]
    SelfLoop { vertex: NodeId },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: NodeId, v: NodeId },
    #[error("non-positive weight on edge ({u}, {v})")]
    NonPositiveWeight { u: NodeId, v: NodeId },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("total edge weight overflows the accumulator")]
    WeightOverflow,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("missing header line \"n m\"")]
    MissingHeader,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("header declares {declared} edges but {found} edge lines follow")]
    EdgeCount { declared: usize, found: usize },
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error("planted cut not unique: expected min cut {expected}, oracle found {found} (x{multiplicity})")]
    PlantedCut { expected: Weight, found: Weight, multiplicity: usize },
}

/// Unvalidated vertex count plus edge triples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeList {
    pub n: u32,
    pub edges: Vec<(NodeId, NodeId, Weight)>,
}

/// Returns every invariant the edge list breaks; empty means it is a valid [`Graph`].
pub fn validate(list: &EdgeList) -> Vec<Violation> {
    let n = list.n;
    let mut out = Vec::new();
    if n < 2 {
        out.push(Violation::TooFewVertices { n });
    }
    let mut seen = BTreeSet::new();
    let mut structural = Vec::new();
    let mut total: Weight = 0;
    let mut overflow = false;
    for &(a, b, w) in &list.edges {
        let mut ok = true;
        for x in [a, b] {
            if x == 0 || x > n {
                out.push(Violation::VertexOutOfRange { vertex: x, n });
                ok = false;
            }
        }
        if a == b {
            out.push(Violation::SelfLoop { vertex: a });
            ok = false;
        }
        if w == 0 {
            out.push(Violation::NonPositiveWeight { u: a.min(b), v: a.max(b) });
        }
        match total.checked_add(w) {
            Some(t) => total = t,
            None => overflow = true,
        }
        if ok {
            if !seen.insert((a.min(b), a.max(b))) {
                out.push(Violation::DuplicateEdge { u: a.min(b), v: a.max(b) });
            } else {
                structural.push((a, b));
            }
        }
    }
    // the broadcast step doubles the cut sum, so keep 2 * total representable
    if overflow || total > Weight::MAX / 2 {
        out.push(Violation::WeightOverflow);
    }
    if n >= 1 {
        let components = count_components(n, &structural);
        if components > 1 {
            out.push(Violation::Disconnected { components });
        }
    }
    out
}

/// Union-find over the vertices the edges touch, so a huge declared `n` costs
/// nothing; every untouched vertex is its own component.
fn count_components(n: u32, edges: &[(NodeId, NodeId)]) -> usize {
    let mut parent: HashMap<NodeId, NodeId> = HashMap::new();
    fn find(p: &mut HashMap<NodeId, NodeId>, x: NodeId) -> NodeId {
        let mut r = x;
        while let Some(&up) = p.get(&r).filter(|&&up| up != r) {
            r = up;
        }
        let mut c = x;
        while c != r {
            let next = p[&c];
            p.insert(c, r);
            c = next;
        }
        r
    }
    for &(a, b) in edges {
        parent.entry(a).or_insert(a);
        parent.entry(b).or_insert(b);
    }
    let mut components = n as usize;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent.insert(ra, rb);
            components -= 1;
        }
    }
    components
}

/// Immutable, validated weighted graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: u32,
    edges: Vec<Edge>,
    adj: Vec<Vec<(NodeId, Weight)>>,
}

impl Graph {
    pub fn new(n: u32, edges: impl IntoIterator<Item = (NodeId, NodeId, Weight)>) -> Result<Self, GraphError> {
        Self::from_edge_list(EdgeList { n, edges: edges.into_iter().collect() })
    }

    pub fn from_edge_list(list: EdgeList) -> Result<Self, GraphError> {
        if let Some(v) = validate(&list).into_iter().next() {
            return Err(v.into());
        }
        let mut edges: Vec<Edge> = list.edges.iter().map(|&(a, b, w)| Edge::new(a, b, w)).collect();
        edges.sort();
        let mut adj = vec![Vec::new(); list.n as usize + 1];
        for e in &edges {
            adj[e.u as usize].push((e.v, e.w));
            adj[e.v as usize].push((e.u, e.w));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n: list.n, edges, adj })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted by `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertices(&self) -> impl Iterator<Item = NodeId> {
        1..=self.n
    }

    /// Neighbors of `u` with edge weights, ascending by neighbor id.
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, Weight)] {
        &self.adj[u as usize]
    }

    pub fn weight(&self, u: NodeId, v: NodeId) -> Option<Weight> {
        let list = self.adj.get(u as usize)?;
        list.binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| list[i].1)
    }

    pub fn total_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Hop diameter (unweighted eccentricity maximum).
    pub fn diameter(&self) -> u32 {
        let mut best = 0;
        let mut dist = vec![u32::MAX; self.n as usize + 1];
        for s in self.vertices() {
            dist.iter_mut().for_each(|d| *d = u32::MAX);
            dist[s as usize] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in self.neighbors(x) {
                    if dist[y as usize] == u32::MAX {
                        dist[y as usize] = dist[x as usize] + 1;
                        best = best.max(dist[y as usize]);
                        queue.push_back(y);
                    }
                }
            }
        }
        best
    }

    /// Canonical edge-list text: header then edges sorted by endpoints.
    pub fn render(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m());
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.u, e.v, e.w));
        }
        out
    }
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_edge_list(s)
    }
}

/// Parses the edge-list format with integer weights.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    parse_edge_list_scaled(text, 1)
}

/// Like [`parse_edge_list`], but weights may be decimals (`1.25`) or fractions
/// (`7/2`); each is multiplied by `denominator` and must come out integral.
pub fn parse_edge_list_scaled(text: &str, denominator: u64) -> Result<Graph, GraphError> {
    if denominator == 0 {
        return Err(GraphError::Params("denominator must be positive".into()));
    }
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(GraphError::MissingHeader)?;
    let mut tok = header.split_whitespace();
    let n: u32 = parse_field(tok.next(), hline, "vertex count")?;
    let m: usize = parse_field(tok.next(), hline, "edge count")?;
    if tok.next().is_some() {
        return Err(malformed(hline, "header must be \"n m\""));
    }

    let mut edges = Vec::with_capacity(m.min(1 << 20));
    for (line, body) in lines {
        let mut tok = body.split_whitespace();
        let a: u32 = parse_field(tok.next(), line, "endpoint")?;
        let b: u32 = parse_field(tok.next(), line, "endpoint")?;
        let raw = tok.next().ok_or_else(|| malformed(line, "missing weight"))?;
        if tok.next().is_some() {
            return Err(malformed(line, "expected \"u v w\""));
        }
        let w = parse_weight(raw, denominator, line, a, b)?;
        edges.push((a, b, w));
    }
    if edges.len() != m {
        return Err(GraphError::EdgeCount { declared: m, found: edges.len() });
    }
    Graph::from_edge_list(EdgeList { n, edges })
}

fn malformed(line: usize, reason: impl Into<String>) -> GraphError {
    GraphError::Malformed { line, reason: reason.into() }
}

fn parse_field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GraphError> {
    let tok = tok.ok_or_else(|| malformed(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| malformed(line, format!("bad {what} {tok:?}")))
}

fn parse_weight(raw: &str, denominator: u64, line: usize, a: u32, b: u32) -> Result<Weight, GraphError> {
    if let Some(rest) = raw.strip_prefix('-') {
        // still has to look like a number to count as a weight
        parse_rational(rest).ok_or_else(|| malformed(line, format!("bad weight {raw:?}")))?;
        return Err(Violation::NonPositiveWeight { u: a.min(b), v: a.max(b) }.into());
    }
    let (num, den) = parse_rational(raw).ok_or_else(|| malformed(line, format!("bad weight {raw:?}")))?;
    let scaled = num
        .checked_mul(denominator as u128)
        .ok_or_else(|| malformed(line, "weight overflow"))?;
    if scaled % den != 0 {
        return Err(malformed(
            line,
            format!("weight {raw} is not a multiple of 1/{denominator}"),
        ));
    }
    Weight::try_from(scaled / den).map_err(|_| malformed(line, "weight overflow"))
}

/// `"12"`, `"1.25"` or `"7/2"` as an exact (numerator, denominator) pair.
fn parse_rational(raw: &str) -> Option<(u128, u128)> {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
    if let Some((p, q)) = raw.split_once('/') {
        if !digits(p) || !digits(q) {
            return None;
        }
        let q: u128 = q.parse().ok()?;
        return (q != 0).then_some((p.parse().ok()?, q));
    }
    if let Some((int, frac)) = raw.split_once('.') {
        if !digits(int) || !digits(frac) || frac.len() > 18 {
            return None;
        }
        let den = 10u128.pow(frac.len() as u32);
        let num = int.parse::<u128>().ok()?.checked_mul(den)?.checked_add(frac.parse().ok()?)?;
        return Some((num, den));
    }
    digits(raw).then(|| raw.parse().ok().map(|v| (v, 1))).flatten()
}

/// Generator family with its parameters, written `family:p1,p2,...`.
#[derive(Clone, Debug, PartialEq)]
pub enum GenSpec {
    Complete { n: u32, weight: Weight },
    Cycle { n: u32, weight: Weight },
    Path { n: u32, weight: Weight },
    /// Random spanning tree plus each remaining pair with probability `density`.
    RandomConnected { n: u32, density: f64, w_min: Weight, w_max: Weight },
    /// Two cliques joined by inter-block edges whose weights sum to `inter_total`.
    PlantedCut { left: u32, right: u32, inter_total: Weight, intra_weight: Weight },
}

impl GenSpec {
    pub fn n(&self) -> u32 {
        match *self {
            GenSpec::Complete { n, .. }
            | GenSpec::Cycle { n, .. }
            | GenSpec::Path { n, .. }
            | GenSpec::RandomConnected { n, .. } => n,
            GenSpec::PlantedCut { left, right, .. } => left.saturating_add(right),
        }
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenSpec::Complete { n, weight } => write!(f, "complete:{n},{weight}"),
            GenSpec::Cycle { n, weight } => write!(f, "cycle:{n},{weight}"),
            GenSpec::Path { n, weight } => write!(f, "path:{n},{weight}"),
            GenSpec::RandomConnected { n, density, w_min, w_max } => {
                write!(f, "random:{n},{density},{w_min},{w_max}")
            }
            GenSpec::PlantedCut { left, right, inter_total, intra_weight } => {
                write!(f, "planted:{left},{right},{inter_total},{intra_weight}")
            }
        }
    }
}

impl FromStr for GenSpec {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| GraphError::Params(format!("{s:?}: {msg}"));
        let (family, params) = s.split_once(':').ok_or_else(|| bad("expected FAMILY:PARAMS"))?;
        let params: Vec<&str> = params.split(',').map(str::trim).collect();
        let int = |i: usize| -> Result<u64, GraphError> {
            params
                .get(i)
                .ok_or_else(|| bad("missing parameter"))?
                .parse()
                .map_err(|_| bad("parameters must be integers"))
        };
        let opt = |i: usize, default: u64| -> Result<u64, GraphError> {
            if params.len() > i {
                int(i)
            } else {
                Ok(default)
            }
        };
        let vertices = |x: u64| u32::try_from(x).map_err(|_| bad("vertex count too large"));
        let arity = |lo: usize, hi: usize| {
            if params.len() < lo || params.len() > hi {
                Err(bad(&format!("expected {lo}..={hi} parameters")))
            } else {
                Ok(())
            }
        };
        let spec = match family {
            "complete" | "cycle" | "path" => {
                arity(1, 2)?;
                let n = vertices(int(0)?)?;
                let weight = opt(1, 1)?;
                match family {
                    "complete" => GenSpec::Complete { n, weight },
                    "cycle" => GenSpec::Cycle { n, weight },
                    _ => GenSpec::Path { n, weight },
                }
            }
            "random" | "random-connected" => {
                arity(2, 4)?;
                let density: f64 = params[1]
                    .parse()
                    .ok()
                    .filter(|d: &f64| d.is_finite())
                    .ok_or_else(|| bad("density must be a finite number"))?;
                GenSpec::RandomConnected {
                    n: vertices(int(0)?)?,
                    density,
                    w_min: opt(2, 1)?,
                    w_max: opt(3, 10)?,
                }
            }
            "planted" | "planted-cut" => {
                arity(3, 4)?;
                let inter_total = int(2)?;
                GenSpec::PlantedCut {
                    left: vertices(int(0)?)?,
                    right: vertices(int(1)?)?,
                    inter_total,
                    intra_weight: opt(3, inter_total.saturating_add(1))?,
                }
            }
            other => return Err(bad(&format!("unknown family {other:?}"))),
        };
        Ok(spec)
    }
}

/// Deterministic graph for `(spec, seed)`.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = |msg: &str| Err(GraphError::Params(format!("{spec}: {msg}")));
    match *spec {
        GenSpec::Complete { n, weight } | GenSpec::Cycle { n, weight } | GenSpec::Path { n, weight } => {
            if n < 2 {
                return params("need n >= 2");
            }
            if weight == 0 {
                return params("weight must be positive");
            }
            let edges: Vec<_> = match spec {
                GenSpec::Complete { .. } => (1..=n)
                    .flat_map(|u| (u + 1..=n).map(move |v| (u, v, weight)))
                    .collect(),
                GenSpec::Path { .. } => (1..n).map(|u| (u, u + 1, weight)).collect(),
                _ if n == 2 => vec![(1, 2, weight)],
                _ => (1..=n).map(|u| (u, u % n + 1, weight)).collect(),
            };
            Graph::new(n, edges)
        }
        GenSpec::RandomConnected { n, density, w_min, w_max } => {
            if n < 2 {
                return params("need n >= 2");
            }
            if !(0.0..=1.0).contains(&density) {
                return params("density must lie in [0, 1]");
            }
            if w_min == 0 || w_min > w_max {
                return params("need 1 <= w_min <= w_max");
            }
            let mut order: Vec<NodeId> = (1..=n).collect();
            order.shuffle(&mut rng);
            let mut pairs = BTreeSet::new();
            for i in 1..order.len() {
                let parent = order[rng.random_range(0..i)];
                pairs.insert((order[i].min(parent), order[i].max(parent)));
            }
            for u in 1..=n {
                for v in u + 1..=n {
                    if !pairs.contains(&(u, v)) && rng.random_bool(density) {
                        pairs.insert((u, v));
                    }
                }
            }
            let edges: Vec<_> = pairs
                .into_iter()
                .map(|(u, v)| (u, v, rng.random_range(w_min..=w_max)))
                .collect();
            Graph::new(n, edges)
        }
        GenSpec::PlantedCut { left, right, inter_total, intra_weight } => {
            if left == 0 || right == 0 {
                return params("blocks must be non-empty");
            }
            if inter_total == 0 {
                return params("inter-block weight must be positive");
            }
            if intra_weight <= inter_total {
                return params("intra-block weight must exceed the inter-block total");
            }
            let n = left + right;
            let mut label: Vec<NodeId> = (1..=n).collect();
            label.shuffle(&mut rng);
            let (a, b) = label.split_at(left as usize);
            let mut edges = Vec::new();
            for block in [a, b] {
                for (i, &x) in block.iter().enumerate() {
                    for &y in &block[i + 1..] {
                        edges.push((x, y, intra_weight));
                    }
                }
            }
            let mut cross: Vec<(NodeId, NodeId)> =
                a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect();
            cross.shuffle(&mut rng);
            let count = rng.random_range(1..=(cross.len() as u64).min(inter_total)) as usize;
            let mut weights = vec![1u64; count];
            for _ in 0..inter_total - count as u64 {
                weights[rng.random_range(0..count)] += 1;
            }
            edges.extend(cross[..count].iter().zip(weights).map(|(&(x, y), w)| (x, y, w)));
            let g = Graph::new(n, edges)?;
            if n <= oracles::BRUTE_FORCE_MAX_N {
                let (found, multiplicity) = oracles::min_cut_multiplicity(&g).expect("n is within brute-force range");
                if found != inter_total || multiplicity != 1 {
                    return Err(GraphError::PlantedCut { expected: inter_total, found, multiplicity });
                }
            }
            Ok(g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p3() -> Graph {
        Graph::new(3, [(1, 2, 3), (2, 3, 4)]).unwrap()
    }

    #[test]
    fn parses_path_and_k2() {
        let g = parse_edge_list("3 2\n1 2 3\n2 3 4").unwrap();
        assert_eq!(g, p3());
        assert_eq!(g.weight(2, 1), Some(3));
        assert_eq!(g.weight(3, 2), Some(4));
        let k2 = parse_edge_list("2 1\n1 2 5").unwrap();
        assert_eq!(k2.edges(), &[Edge::new(1, 2, 5)]);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let g = parse_edge_list("# P3\n\n3 2\n  # edges follow\n2 3 4\n1 2 3\n").unwrap();
        assert_eq!(g, p3());
    }

    #[test]
    fn each_failure_has_its_own_diagnostic() {
        let err = |s: &str| parse_edge_list(s).unwrap_err();
        assert_eq!(err("3 2\n1 2 3\n1 2 4"), Violation::DuplicateEdge { u: 1, v: 2 }.into());
        assert_eq!(err("3 2\n1 1 3\n2 3 4"), Violation::SelfLoop { vertex: 1 }.into());
        assert_eq!(err("3 2\n1 2 0\n2 3 4"), Violation::NonPositiveWeight { u: 1, v: 2 }.into());
        assert_eq!(err("3 2\n1 2 -2\n2 3 4"), Violation::NonPositiveWeight { u: 1, v: 2 }.into());
        assert_eq!(err("3 2\n1 2 3\n2 4 4"), Violation::VertexOutOfRange { vertex: 4, n: 3 }.into());
        assert_eq!(err("4 2\n1 2 3\n3 4 4"), Violation::Disconnected { components: 2 }.into());
        assert!(matches!(err("3 2\n1 2 x\n2 3 4"), GraphError::Malformed { line: 2, .. }));
        assert!(matches!(err("3 2\n1 2\n2 3 4"), GraphError::Malformed { line: 2, .. }));
        assert!(matches!(err("3 2 7\n"), GraphError::Malformed { line: 1, .. }));
        assert_eq!(err("3 2\n1 2 3"), GraphError::EdgeCount { declared: 2, found: 1 });
        assert_eq!(err("# nothing\n"), GraphError::MissingHeader);
    }

    #[test]
    fn scaled_weights() {
        let g = parse_edge_list_scaled("3 2\n1 2 1.5\n2 3 7/4", 4).unwrap();
        assert_eq!(g.weight(1, 2), Some(6));
        assert_eq!(g.weight(2, 3), Some(7));
        assert!(parse_edge_list_scaled("2 1\n1 2 1.5", 1).is_err());
        assert!(parse_edge_list("2 1\n1 2 1.0").is_ok());
    }

    #[test]
    fn validate_reports_violations() {
        let list = |n, e: &[(u32, u32, u64)]| EdgeList { n, edges: e.to_vec() };
        assert!(validate(&list(3, &[(1, 2, 3), (2, 3, 4)])).is_empty());
        assert_eq!(
            validate(&list(3, &[(1, 2, 0), (2, 3, 4)])),
            vec![Violation::NonPositiveWeight { u: 1, v: 2 }]
        );
        assert_eq!(
            validate(&list(4, &[(1, 2, 1), (3, 4, 1)])),
            vec![Violation::Disconnected { components: 2 }]
        );
        assert_eq!(validate(&list(1, &[])), vec![Violation::TooFewVertices { n: 1 }]);
    }

    #[test]
    fn generators_cover_families() {
        let c4 = generate(&"cycle:4".parse().unwrap(), 0).unwrap();
        assert_eq!(c4.m(), 4);
        assert_eq!(oracles::brute_force_mincut(&c4).unwrap().0, 2);
        let k2 = generate(&"complete:2,5".parse().unwrap(), 9).unwrap();
        assert_eq!(k2.edges(), &[Edge::new(1, 2, 5)]);
        let planted = generate(&"planted:3,3,2".parse().unwrap(), 1).unwrap();
        assert_eq!(oracles::brute_force_mincut(&planted).unwrap().0, 2);
        assert_eq!(generate(&"path:5,2".parse().unwrap(), 0).unwrap().diameter(), 4);
    }

    #[test]
    fn gen_spec_rejects_bad_params() {
        assert!("cycle".parse::<GenSpec>().is_err());
        assert!("torus:4".parse::<GenSpec>().is_err());
        assert!("cycle:x".parse::<GenSpec>().is_err());
        assert!(generate(&"cycle:1".parse().unwrap(), 0).is_err());
        assert!(generate(&"random:5,1.5".parse().unwrap(), 0).is_err());
        assert!(generate(&"planted:3,3,4,4".parse().unwrap(), 0).is_err());
    }

    #[test]
    fn planted_cut_value_matches_oracle() {
        for seed in 0..50 {
            for spec in ["planted:3,3,2", "planted:4,4,3", "planted:1,5,2", "planted:6,6,5,6"] {
                let spec: GenSpec = spec.parse().unwrap();
                let g = generate(&spec, seed).unwrap();
                let GenSpec::PlantedCut { inter_total, .. } = spec else { unreachable!() };
                assert_eq!(oracles::brute_force_mincut(&g).unwrap().0, inter_total);
            }
        }
    }

    fn any_spec() -> impl Strategy<Value = GenSpec> {
        prop_oneof![
            (2u32..12, 1u64..9).prop_map(|(n, weight)| GenSpec::Complete { n, weight }),
            (2u32..12, 1u64..9).prop_map(|(n, weight)| GenSpec::Cycle { n, weight }),
            (2u32..12, 1u64..9).prop_map(|(n, weight)| GenSpec::Path { n, weight }),
            (2u32..14, 0.0f64..1.0, 1u64..5, 0u64..6).prop_map(|(n, density, w_min, span)| {
                GenSpec::RandomConnected { n, density, w_min, w_max: w_min + span }
            }),
            (1u32..6, 1u32..6, 1u64..6, 1u64..4).prop_map(|(left, right, inter_total, extra)| {
                GenSpec::PlantedCut { left, right, inter_total, intra_weight: inter_total + extra }
            }),
        ]
    }

    proptest! {
        #[test]
        fn generated_graphs_are_valid_and_round_trip(spec in any_spec(), seed in any::<u64>()) {
            prop_assume!(spec.n() >= 2);
            let g = generate(&spec, seed).unwrap();
            let list = EdgeList { n: g.n(), edges: g.edges().iter().map(|e| (e.u, e.v, e.w)).collect() };
            prop_assert!(validate(&list).is_empty());
            prop_assert_eq!(parse_edge_list(&g.render()).unwrap(), g.clone());
            prop_assert_eq!(generate(&spec, seed).unwrap(), g);
            let respec: GenSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(respec, spec);
        }

        #[test]
        fn parser_never_panics(text in "[0-9 #\\n./-]{0,64}") {
            let _ = parse_edge_list(&text);
            let _ = parse_edge_list_scaled(&text, 3);
        }
    }
}
