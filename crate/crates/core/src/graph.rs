//! Per-round communication graphs and time-varying graph sequences.
//!
//! Every node carries an implicit self-loop which is never stored but is
//! counted by [`GraphSnapshot::degree`]. Rounds are 1-indexed.

use std::borrow::Cow;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{argument, Error, Result};

pub type NodeId = usize;

/// Unordered pair of distinct nodes, stored with the smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge(a, b)),
            std::cmp::Ordering::Greater => Ok(Edge(b, a)),
            std::cmp::Ordering::Equal => Err(argument(format!(
                "self-pair {a}-{a}: self-loops are implicit and cannot be stored"
            ))),
        }
    }

    pub fn lo(self) -> NodeId {
        self.0
    }

    pub fn hi(self) -> NodeId {
        self.1
    }

    pub fn touches(self, i: NodeId) -> bool {
        self.0 == i || self.1 == i
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl FromStr for Edge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| argument(format!("edge token `{s}` is not of the form i-j")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<NodeId>()
                .map_err(|_| argument(format!("edge token `{s}` has a non-integer endpoint")))
        };
        Edge::new(parse(a)?, parse(b)?)
    }
}

/// One round's undirected graph on nodes `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSnapshot {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<NodeId>>,
}

impl GraphSnapshot {
    /// Builds a snapshot from an edge collection. Repeated edges collapse to one.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let set: BTreeSet<Edge> = edges.into_iter().collect();
        if let Some(bad) = set.iter().find(|e| e.hi() >= n) {
            return Err(argument(format!("edge {bad} has an endpoint outside 0..{n}")));
        }
        let mut adjacency = vec![Vec::new(); n];
        for e in &set {
            adjacency[e.lo()].push(e.hi());
            adjacency[e.hi()].push(e.lo());
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(GraphSnapshot {
            n,
            edges: set.into_iter().collect(),
            adjacency,
        })
    }

    pub fn from_pairs(n: usize, pairs: &[(NodeId, NodeId)]) -> Result<Self> {
        let edges = pairs
            .iter()
            .map(|&(a, b)| Edge::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, edges)
    }

    pub fn edgeless(n: usize) -> Self {
        GraphSnapshot {
            n,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| Edge(i, j)));
        Self::new(n, edges).expect("complete graph edges are in range")
    }

    /// Path `0-1-2-…-(n-1)`.
    pub fn line(n: usize) -> Self {
        let order: Vec<NodeId> = (0..n).collect();
        Self::path_through(&order).expect("identity order is a permutation")
    }

    /// Path visiting `order[0], order[1], …`; `order` must be a permutation of `0..n`.
    pub fn path_through(order: &[NodeId]) -> Result<Self> {
        let n = order.len();
        let edges = order
            .windows(2)
            .map(|w| Edge::new(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        let g = Self::new(n, edges)?;
        if g.edge_count() + 1 != n.max(1) {
            return Err(argument("path order is not a permutation"));
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(argument(format!("a cycle needs at least 3 nodes, got {n}")));
        }
        Self::new(n, (0..n).map(|i| Edge::new(i, (i + 1) % n).unwrap()))
    }

    pub fn star(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| Edge(0, i))).expect("star edges are in range")
    }

    /// Parses one line of the edge-list text form: space-separated `i-j` tokens.
    pub fn parse_line(n: usize, line: &str) -> Result<Self> {
        let edges = line
            .split_whitespace()
            .map(str::parse::<Edge>)
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Neighbours of `i` in ascending order, excluding `i` itself.
    ///
    /// Panics if `i` is out of range.
    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.adjacency[i]
    }

    /// Degree of `i` with the implicit self-loop counted: `1 + |neighbours|`.
    pub fn degree(&self, i: NodeId) -> Result<usize> {
        self.adjacency
            .get(i)
            .map(|adj| adj.len() + 1)
            .ok_or_else(|| argument(format!("node {i} outside 0..{}", self.n)))
    }

    pub fn is_connected(&self) -> bool {
        is_connected(self.n, self.edges.iter().copied())
    }

    /// Renders the snapshot in the edge-list text form.
    pub fn to_line(&self) -> String {
        let tokens: Vec<String> = self.edges.iter().map(Edge::to_string).collect();
        tokens.join(" ")
    }
}

pub(crate) fn is_connected(n: usize, edges: impl IntoIterator<Item = Edge>) -> bool {
    if n <= 1 {
        return true;
    }
    let mut adjacency = vec![Vec::new(); n];
    for e in edges {
        adjacency[e.lo()].push(e.hi());
        adjacency[e.hi()].push(e.lo());
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    reached == n
}

#[derive(Clone, Debug, PartialEq)]
pub enum SequenceKind {
    Static(GraphSnapshot),
    Periodic(Vec<GraphSnapshot>),
    /// Each core edge appears at one random position inside every block of
    /// `block` rounds; every other pair appears independently with
    /// probability `extra_prob` per round.
    CoreSynthetic {
        core: Vec<Edge>,
        block: usize,
        extra_prob: f64,
    },
    /// A fresh uniformly relabelled path every round.
    RelabeledLine,
    Explicit(Vec<GraphSnapshot>),
}

// ChaCha stream tags; the low bits carry the block or round index.
const STREAM_CORE_BLOCK: u64 = 1 << 62;
const STREAM_EXTRA_ROUND: u64 = 2 << 62;
const STREAM_RELABEL_ROUND: u64 = 3 << 62;

/// A deterministic, seeded sequence of graphs `G(1), G(2), …`.
///
/// `snapshot(t)` is a pure function of the kind parameters, the seed and `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSequence {
    n: usize,
    seed: u64,
    kind: SequenceKind,
}

impl GraphSequence {
    pub fn fixed(graph: GraphSnapshot) -> Self {
        GraphSequence {
            n: graph.n(),
            seed: 0,
            kind: SequenceKind::Static(graph),
        }
    }

    pub fn periodic(period: Vec<GraphSnapshot>) -> Result<Self> {
        let n = common_n(&period, "periodic")?;
        Ok(GraphSequence {
            n,
            seed: 0,
            kind: SequenceKind::Periodic(period),
        })
    }

    pub fn explicit(rounds: Vec<GraphSnapshot>) -> Result<Self> {
        let n = common_n(&rounds, "explicit")?;
        Ok(GraphSequence {
            n,
            seed: 0,
            kind: SequenceKind::Explicit(rounds),
        })
    }

    /// Parses the edge-list text form: one round per line, blank line means
    /// an edgeless round. A final newline terminates the last round rather
    /// than starting a new one.
    pub fn parse_explicit(n: usize, text: &str) -> Result<Self> {
        let rounds = text
            .split_terminator('\n')
            .map(|line| line.strip_suffix('\r').unwrap_or(line))
            .enumerate()
            .map(|(k, line)| GraphSnapshot::parse_line(n, line).map_err(|e| argument(format!("line {}: {e}", k + 1))))
            .collect::<Result<Vec<_>>>()?;
        if rounds.is_empty() {
            return Err(argument("explicit sequence has no rounds"));
        }
        Ok(GraphSequence {
            n,
            seed: 0,
            kind: SequenceKind::Explicit(rounds),
        })
    }

    /// The core edge set must span a connected graph on `0..n`.
    pub fn core_synthetic(n: usize, core: Vec<Edge>, block: usize, extra_prob: f64, seed: u64) -> Result<Self> {
        if block == 0 {
            return Err(argument("block length B must be positive"));
        }
        if !(0.0..=1.0).contains(&extra_prob) {
            return Err(argument(format!("extra-edge probability {extra_prob} outside [0, 1]")));
        }
        let core: Vec<Edge> = core.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if let Some(bad) = core.iter().find(|e| e.hi() >= n) {
            return Err(argument(format!("core edge {bad} has an endpoint outside 0..{n}")));
        }
        if !is_connected(n, core.iter().copied()) {
            return Err(argument("core edges do not connect all nodes"));
        }
        Ok(GraphSequence {
            n,
            seed,
            kind: SequenceKind::CoreSynthetic {
                core,
                block,
                extra_prob,
            },
        })
    }

    pub fn relabeled_line(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(argument("relabeled line needs at least one node"));
        }
        Ok(GraphSequence {
            n,
            seed,
            kind: SequenceKind::RelabeledLine,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    /// Number of defined rounds, for sequences that end.
    pub fn finite_len(&self) -> Option<usize> {
        match &self.kind {
            SequenceKind::Explicit(rounds) => Some(rounds.len()),
            _ => None,
        }
    }

    /// The graph `G(t)` for `t ≥ 1`.
    pub fn snapshot(&self, t: u64) -> Result<Cow<'_, GraphSnapshot>> {
        if t == 0 {
            return Err(argument("rounds are numbered from 1"));
        }
        match &self.kind {
            SequenceKind::Static(g) => Ok(Cow::Borrowed(g)),
            SequenceKind::Periodic(period) => {
                let k = ((t - 1) % period.len() as u64) as usize;
                Ok(Cow::Borrowed(&period[k]))
            }
            SequenceKind::Explicit(rounds) => usize::try_from(t - 1)
                .ok()
                .and_then(|k| rounds.get(k))
                .map(Cow::Borrowed)
                .ok_or(Error::OutOfRange { t, len: rounds.len() }),
            SequenceKind::CoreSynthetic {
                core,
                block,
                extra_prob,
            } => Ok(Cow::Owned(self.core_round(t, core, *block, *extra_prob))),
            SequenceKind::RelabeledLine => {
                let mut rng = self.stream(STREAM_RELABEL_ROUND, t);
                let mut order: Vec<NodeId> = (0..self.n).collect();
                order.shuffle(&mut rng);
                Ok(Cow::Owned(
                    GraphSnapshot::path_through(&order).expect("shuffle yields a permutation"),
                ))
            }
        }
    }

    /// Materializes rounds `1..=rounds`.
    pub fn window(&self, rounds: usize) -> Result<Vec<GraphSnapshot>> {
        (1..=rounds as u64)
            .map(|t| self.snapshot(t).map(Cow::into_owned))
            .collect()
    }

    fn stream(&self, tag: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(tag | index);
        rng
    }

    fn core_round(&self, t: u64, core: &[Edge], block: usize, extra_prob: f64) -> GraphSnapshot {
        let b = block as u64;
        let block_index = (t - 1) / b;
        let offset = ((t - 1) % b) as usize;
        let mut placement = self.stream(STREAM_CORE_BLOCK, block_index);
        let mut edges: Vec<Edge> = core
            .iter()
            .copied()
            .filter(|_| placement.random_range(0..block) == offset)
            .collect();
        if extra_prob > 0.0 {
            let mut extra = self.stream(STREAM_EXTRA_ROUND, t);
            for i in 0..self.n {
                for j in (i + 1)..self.n {
                    let e = Edge(i, j);
                    if extra.random_bool(extra_prob) && core.binary_search(&e).is_err() {
                        edges.push(e);
                    }
                }
            }
        }
        GraphSnapshot::new(self.n, edges).expect("generated edges are in range")
    }
}

fn common_n(graphs: &[GraphSnapshot], what: &str) -> Result<usize> {
    let first = graphs
        .first()
        .ok_or_else(|| argument(format!("{what} sequence needs at least one graph")))?;
    if graphs.iter().any(|g| g.n() != first.n()) {
        return Err(argument(format!("{what} sequence mixes node counts")));
    }
    Ok(first.n())
}

/// Outcome of [`check_core_connected`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreCheck {
    pub is_core_connected: bool,
    /// Edges present in every complete block: the largest possible core.
    pub core_edges: Vec<Edge>,
}

/// Sorted edge union of one block.
fn block_union(chunk: &[GraphSnapshot]) -> Vec<Edge> {
    if let [only] = chunk {
        return only.edges().to_vec();
    }
    let mut union: Vec<Edge> = chunk.iter().flat_map(|g| g.edges().iter().copied()).collect();
    union.sort_unstable();
    union.dedup();
    union
}

/// Decides B-core-connectivity of a finite window.
///
/// The window is cut into complete blocks of `block` rounds (a partial
/// trailing block is ignored). The candidate core is the intersection of the
/// per-block edge unions; the window is core-connected iff that candidate
/// spans a connected graph.
pub fn check_core_connected(snapshots: &[GraphSnapshot], block: usize) -> Result<CoreCheck> {
    if block == 0 {
        return Err(argument("block length B must be positive"));
    }
    if snapshots.len() < block {
        return Err(argument(format!(
            "window of {} rounds holds no complete block of {block}",
            snapshots.len()
        )));
    }
    let n = common_n(snapshots, "core check")?;
    let complete = snapshots.len() / block * block;
    let mut blocks = snapshots[..complete].chunks(block);
    let mut core: Vec<Edge> = blocks.next().map(block_union).unwrap_or_default();
    for chunk in blocks {
        if core.is_empty() {
            break;
        }
        let union = block_union(chunk);
        core.retain(|e| union.binary_search(e).is_ok());
    }
    let core_edges = core;
    Ok(CoreCheck {
        is_core_connected: is_connected(n, core_edges.iter().copied()),
        core_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(g: &GraphSnapshot) -> Vec<(usize, usize)> {
        g.edges().iter().map(|e| (e.lo(), e.hi())).collect()
    }

    #[test]
    fn static_complete_is_constant() {
        let seq = GraphSequence::fixed(GraphSnapshot::complete(3));
        assert_eq!(pairs(&seq.snapshot(7).unwrap()), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(seq.snapshot(1).unwrap(), seq.snapshot(7).unwrap());
    }

    #[test]
    fn relabeled_line_is_a_spanning_path() {
        let seq = GraphSequence::relabeled_line(3, 99).unwrap();
        for t in 1..20 {
            let g = seq.snapshot(t).unwrap();
            assert_eq!(g.edge_count(), 2);
            assert!(g.is_connected());
        }
    }

    #[test]
    fn periodic_cycles_through_its_period() {
        let a = GraphSnapshot::from_pairs(3, &[(0, 1)]).unwrap();
        let b = GraphSnapshot::from_pairs(3, &[(1, 2)]).unwrap();
        let seq = GraphSequence::periodic(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(*seq.snapshot(1).unwrap(), a);
        assert_eq!(*seq.snapshot(2).unwrap(), b);
        assert_eq!(*seq.snapshot(3).unwrap(), a);
    }

    #[test]
    fn explicit_past_end_is_out_of_range() {
        let seq = GraphSequence::parse_explicit(3, "0-1\n\n1-2 0-2").unwrap();
        assert_eq!(seq.finite_len(), Some(3));
        assert_eq!(seq.snapshot(2).unwrap().edge_count(), 0);
        assert_eq!(seq.snapshot(3).unwrap().edge_count(), 2);
        assert!(matches!(seq.snapshot(4), Err(Error::OutOfRange { t: 4, len: 3 })));
        assert!(seq.snapshot(0).is_err());
    }

    #[test]
    fn edge_list_rejects_bad_tokens() {
        assert!(GraphSnapshot::parse_line(3, "0-3").is_err());
        assert!(GraphSnapshot::parse_line(3, "1-1").is_err());
        assert!(GraphSnapshot::parse_line(3, "0_1").is_err());
        assert!(GraphSequence::parse_explicit(3, "0-1\nx-2").is_err());
        let g = GraphSnapshot::parse_line(4, "2-1 1-2  0-3").unwrap();
        assert_eq!(g.to_line(), "0-3 1-2");
    }

    #[test]
    fn degree_counts_the_self_loop() {
        let k4 = GraphSnapshot::complete(4);
        assert!((0..4).all(|i| k4.degree(i).unwrap() == 4));
        let empty = GraphSnapshot::edgeless(5);
        assert!((0..5).all(|i| empty.degree(i).unwrap() == 1));
        assert_eq!(GraphSnapshot::line(3).degree(1).unwrap(), 3);
        assert!(matches!(k4.degree(4), Err(Error::Argument(_))));
    }

    #[test]
    fn core_check_examples() {
        let k3 = GraphSnapshot::complete(3);
        let check = check_core_connected(&vec![k3.clone(); 4], 1).unwrap();
        assert!(check.is_core_connected);
        assert_eq!(check.core_edges, k3.edges().to_vec());

        let a = GraphSnapshot::from_pairs(3, &[(0, 1)]).unwrap();
        let b = GraphSnapshot::from_pairs(3, &[(1, 2)]).unwrap();
        let alternating: Vec<_> = (0..8).map(|k| if k % 2 == 0 { a.clone() } else { b.clone() }).collect();
        let two = check_core_connected(&alternating, 2).unwrap();
        assert!(two.is_core_connected);
        assert_eq!(two.core_edges, vec![Edge(0, 1), Edge(1, 2)]);
        let one = check_core_connected(&alternating, 1).unwrap();
        assert!(!one.is_core_connected);
        assert!(one.core_edges.is_empty());
    }

    #[test]
    fn core_check_ignores_partial_block_and_rejects_bad_args() {
        let a = GraphSnapshot::from_pairs(2, &[(0, 1)]).unwrap();
        let e = GraphSnapshot::edgeless(2);
        // The trailing edgeless round sits in an incomplete block.
        assert!(
            check_core_connected(&[a.clone(), a.clone(), e.clone()], 2)
                .unwrap()
                .is_core_connected
        );
        assert!(check_core_connected(&[], 1).is_err());
        assert!(check_core_connected(std::slice::from_ref(&a), 0).is_err());
        assert!(check_core_connected(&[a], 2).is_err());
    }

    #[test]
    fn core_synthetic_places_each_core_edge_once_per_block() {
        let core = vec![Edge(0, 1), Edge(1, 2), Edge(2, 3)];
        let seq = GraphSequence::core_synthetic(4, core.clone(), 3, 0.0, 5).unwrap();
        let window = seq.window(30).unwrap();
        for chunk in window.chunks(3) {
            for e in &core {
                assert_eq!(chunk.iter().filter(|g| g.contains(*e)).count(), 1);
            }
        }
        assert!(GraphSequence::core_synthetic(4, vec![Edge(0, 1)], 3, 0.0, 5).is_err());
        assert!(GraphSequence::core_synthetic(4, core.clone(), 0, 0.0, 5).is_err());
        assert!(GraphSequence::core_synthetic(4, core, 2, 1.5, 5).is_err());
    }

    #[test]
    fn dense_core_synthetic_adds_extra_edges() {
        let core = vec![Edge(0, 1), Edge(1, 2), Edge(2, 3)];
        let seq = GraphSequence::core_synthetic(4, core, 1, 1.0, 5).unwrap();
        assert_eq!(*seq.snapshot(3).unwrap(), GraphSnapshot::complete(4));
    }
}
