//! Synchronous round executor.
//!
//! Each round runs in phases with a barrier between them: materialize
//! `G(t)`, open ledger entries for new edges, compute every message from the
//! time-(t-1) state, deliver and apply them, then compute active sets and
//! value updates. Only [`Message`]s move between nodes.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{compute_metrics, Baseline, MetricsRow, RoundValidator};
use crate::error::{argument, Error, Result};
use crate::graph::{Edge, GraphSequence, GraphSnapshot, NodeId};
use crate::protocol::{DegreeBoundPolicy, Message, NodeState, PairBound, ProtocolParams, Variant};

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    /// `x(0) = (1, 0, …, 0)`.
    Spike,
    UniformRandom {
        seed: u64,
        lo: f64,
        hi: f64,
    },
    Explicit(Vec<f64>),
}

impl InitSpec {
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Config("a network needs at least one node".into()));
        }
        match self {
            InitSpec::Spike => {
                let mut x = vec![0.0; n];
                x[0] = 1.0;
                Ok(x)
            }
            InitSpec::UniformRandom { seed, lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::Config(format!(
                        "uniform_random needs finite lo < hi, got [{lo}, {hi}]"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..n).map(|_| rng.random_range(*lo..*hi)).collect())
            }
            InitSpec::Explicit(values) => {
                if values.len() != n {
                    return Err(Error::Config(format!(
                        "explicit init has {} values for {n} nodes",
                        values.len()
                    )));
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Config(format!("explicit init value {v} is not finite")));
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordLevel {
    MetricsOnly,
    FullTrace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub seq: GraphSequence,
    pub params: ProtocolParams,
    pub init: InitSpec,
    pub t_max: u64,
    pub record_level: RecordLevel,
    pub check_invariants: bool,
    /// Stop after the first round whose `err_max` is at or below this.
    pub stop_err: Option<f64>,
}

impl SimulationConfig {
    pub fn new(seq: GraphSequence, params: ProtocolParams, init: InitSpec, t_max: u64) -> Self {
        SimulationConfig {
            seq,
            params,
            init,
            t_max,
            record_level: RecordLevel::MetricsOnly,
            check_invariants: false,
            stop_err: None,
        }
    }

    pub fn checked(mut self) -> Self {
        self.check_invariants = true;
        self
    }

    pub fn full_trace(mut self) -> Self {
        self.record_level = RecordLevel::FullTrace;
        self
    }

    pub fn stop_at(mut self, err: f64) -> Self {
        self.stop_err = Some(err);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(Error::Config("t_max must be at least 1".into()));
        }
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(e) = self.stop_err {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::Config(format!("stop_err {e} must be a nonnegative real")));
            }
        }
        self.init.values(self.seq.n()).map(drop)
    }
}

/// Both estimates node `holder` keeps about `peer` after a round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatePair {
    pub x_hat_in: f64,
    pub x_hat_out: f64,
}

/// Everything observable about one round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub graph: GraphSnapshot,
    /// Both directions of every edge, ordered by sender then receiver.
    pub messages: Vec<Message>,
    /// `S(i,t)` for every node, ascending.
    pub active_sets: Vec<Vec<NodeId>>,
    pub x_pre: Vec<f64>,
    pub x_post: Vec<f64>,
    /// `D(i,j,t)` as used in the update, for mutually active pairs.
    pub d_bounds: BTreeMap<Edge, f64>,
    /// Ledger contents after the round, keyed by `(holder, peer)`.
    pub estimates: BTreeMap<(NodeId, NodeId), EstimatePair>,
}

impl RoundRecord {
    pub fn nonzero_msgs(&self) -> usize {
        self.messages.iter().filter(|m| !m.q.is_zero()).count()
    }

    pub fn active_edges(&self) -> usize {
        self.active_sets
            .iter()
            .enumerate()
            .map(|(i, s)| s.iter().filter(|&&j| j > i).count())
            .sum()
    }
}

/// All node states after some number of rounds.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    nodes: Vec<NodeState>,
    round: u64,
}

impl World {
    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    /// Fault-injection hook for tests.
    #[doc(hidden)]
    pub fn nodes_mut(&mut self) -> &mut [NodeState] {
        &mut self.nodes
    }

    pub fn values(&self) -> Vec<f64> {
        self.nodes.iter().map(|s| s.x).collect()
    }

    /// Last completed round; 0 before the first.
    pub fn round(&self) -> u64 {
        self.round
    }
}

pub fn init_state(config: &SimulationConfig) -> Result<World> {
    let x = config.init.values(config.seq.n())?;
    let nodes = x
        .into_iter()
        .enumerate()
        .map(|(i, v)| NodeState::new(i, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(World { nodes, round: 0 })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct RoundStats {
    active_edges: usize,
    nonzero_msgs: usize,
}

/// Runs round `t` on `world`, which must hold the state after round `t-1`.
pub fn run_round(world: &mut World, t: u64, config: &SimulationConfig) -> Result<RoundRecord> {
    let (_, record) = step(world, t, config, true)?;
    Ok(record.expect("capture requested"))
}

fn step(
    world: &mut World,
    t: u64,
    config: &SimulationConfig,
    capture: bool,
) -> Result<(RoundStats, Option<RoundRecord>)> {
    if t == 0 || t != world.round + 1 {
        return Err(argument(format!("round {t} cannot follow round {}", world.round)));
    }
    let params = &config.params;
    let graph = config.seq.snapshot(t)?;
    let n = world.nodes.len();
    if graph.n() != n {
        return Err(argument(format!("graph has {} nodes, world has {n}", graph.n())));
    }

    if let (Variant::Theorem, DegreeBoundPolicy::Fixed(_)) = (params.variant, params.degree_policy) {
        for &e in graph.edges() {
            params.degree_policy.bound(&graph, e, t)?;
        }
    }

    for e in graph.edges() {
        let a = world.nodes[e.lo()].open_link(e.hi(), t);
        let b = world.nodes[e.hi()].open_link(e.lo(), t);
        debug_assert_eq!(a, b, "ledgers of {e} out of step");
    }

    let x_pre = if capture { world.values() } else { Vec::new() };

    let mut outbox: Vec<Vec<Message>> = Vec::with_capacity(n);
    for (i, node) in world.nodes.iter().enumerate() {
        outbox.push(
            graph
                .neighbors(i)
                .iter()
                .map(|&j| node.compute_message(j, t, params))
                .collect::<Result<_>>()?,
        );
    }
    let inbox: Vec<Vec<Message>> = (0..n)
        .map(|i| {
            graph
                .neighbors(i)
                .iter()
                .map(|&j| {
                    let k = graph.neighbors(j).binary_search(&i).expect("adjacency is symmetric");
                    outbox[j][k]
                })
                .collect()
        })
        .collect();

    for (i, node) in world.nodes.iter_mut().enumerate() {
        node.apply_messages(t, graph.neighbors(i), &outbox[i], &inbox[i], params)?;
    }

    let mut active_sets = Vec::with_capacity(n);
    for (i, node) in world.nodes.iter().enumerate() {
        active_sets.push(node.active_set(t, graph.neighbors(i), &outbox[i], &inbox[i], params)?);
    }

    let mut stats = RoundStats {
        nonzero_msgs: outbox.iter().flatten().filter(|m| !m.q.is_zero()).count(),
        active_edges: 0,
    };
    let mut d_bounds = BTreeMap::new();
    let mut node_bounds: Vec<BTreeMap<NodeId, PairBound>> = vec![BTreeMap::new(); n];
    for (i, set) in active_sets.iter().enumerate() {
        for &j in set.iter().filter(|&&j| j > i) {
            let e = Edge::new(i, j)?;
            let pb = pair_bound(params, &graph, e, t)?;
            node_bounds[i].insert(j, pb);
            node_bounds[j].insert(i, pb);
            stats.active_edges += 1;
            if capture {
                d_bounds.insert(e, pb.bound);
            }
        }
    }
    // A one-sided active pair only gets its bound from the lower endpoint's
    // loop above; fill the remainder so the node reports the asymmetry itself.
    for (i, set) in active_sets.iter().enumerate() {
        for &j in set {
            if !node_bounds[i].contains_key(&j) {
                node_bounds[i].insert(j, pair_bound(params, &graph, Edge::new(i, j)?, t)?);
            }
        }
    }

    for (i, node) in world.nodes.iter_mut().enumerate() {
        node.value_update(t, &active_sets[i], &node_bounds[i], params)?;
        if !node.x.is_finite() {
            return Err(Error::Divergence { node: i, t });
        }
    }
    world.round = t;

    let record = capture.then(|| {
        let estimates = world
            .nodes
            .iter()
            .flat_map(|node| {
                node.ledger.iter().map(move |(j, e)| {
                    (
                        (node.id, j),
                        EstimatePair {
                            x_hat_in: e.x_hat_in,
                            x_hat_out: e.x_hat_out,
                        },
                    )
                })
            })
            .collect();
        RoundRecord {
            t,
            graph: graph.into_owned(),
            messages: outbox.into_iter().flatten().collect(),
            active_sets,
            x_pre,
            x_post: world.values(),
            d_bounds,
            estimates,
        }
    });
    Ok((stats, record))
}

/// The practical variant ignores the policy and always divides by the larger
/// endpoint degree.
fn pair_bound(params: &ProtocolParams, graph: &GraphSnapshot, e: Edge, t: u64) -> Result<PairBound> {
    match params.variant {
        Variant::Theorem => params.degree_policy.bound(graph, e, t),
        Variant::Practical => {
            let max_degree = graph.degree(e.lo())?.max(graph.degree(e.hi())?);
            Ok(PairBound {
                bound: max_degree as f64,
                max_degree,
            })
        }
    }
}

/// What an observer sees after each round.
pub struct RoundView<'a> {
    pub metrics: &'a MetricsRow,
    pub world: &'a World,
    /// Present when the run records a full trace or checks invariants.
    pub record: Option<&'a RoundRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub rounds: u64,
    /// Metrics of `x(0)`, reported with `t = 0`.
    pub initial: MetricsRow,
    pub last: MetricsRow,
    /// First round with `err_max ≤ stop_err`; 0 when `x(0)` already qualifies.
    pub first_hit: Option<u64>,
    pub final_x: Vec<f64>,
}

/// Runs rounds `1..=t_max`, stopping early on the configured error threshold
/// or when `observe` breaks. With `check_invariants` every round is validated
/// and the run aborts on the first violation.
pub fn run_with<F>(config: &SimulationConfig, mut observe: F) -> Result<RunSummary>
where
    F: FnMut(&RoundView<'_>) -> ControlFlow<()>,
{
    config.validate()?;
    let mut world = init_state(config)?;
    let x0 = world.values();
    let baseline = Baseline::from_initial(&x0)?;
    let initial = MetricsRow::from_dispersion(0, compute_metrics(&x0, baseline.avg0)?, 0, 0);
    let mut validator = config
        .check_invariants
        .then(|| RoundValidator::new(config.params.clone(), baseline.clone(), initial.clone()));
    let capture = config.check_invariants || config.record_level == RecordLevel::FullTrace;

    let hit = |row: &MetricsRow| config.stop_err.is_some_and(|e| row.err_max <= e);
    let mut summary = RunSummary {
        rounds: 0,
        initial: initial.clone(),
        last: initial.clone(),
        first_hit: hit(&initial).then_some(0),
        final_x: x0,
    };
    if summary.first_hit.is_some() {
        return Ok(summary);
    }

    for t in 1..=config.t_max {
        let (stats, record) = step(&mut world, t, config, capture)?;
        let x = world.values();
        let row = MetricsRow::from_dispersion(
            t,
            compute_metrics(&x, baseline.avg0)?,
            stats.active_edges,
            stats.nonzero_msgs,
        );
        if let (Some(v), Some(rec)) = (validator.as_mut(), record.as_ref()) {
            let violations = v.check(rec);
            if !violations.is_empty() {
                return Err(Error::Invariant { t, violations });
            }
        }
        let flow = observe(&RoundView {
            metrics: &row,
            world: &world,
            record: record.as_ref(),
        });
        summary.rounds = t;
        summary.final_x = x;
        let reached = hit(&row);
        summary.last = row;
        if reached {
            summary.first_hit = Some(t);
            break;
        }
        if flow.is_break() {
            break;
        }
    }
    Ok(summary)
}

/// Collected output of [`run`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub metrics: Vec<MetricsRow>,
    /// Empty unless the record level is [`RecordLevel::FullTrace`].
    pub records: Vec<RoundRecord>,
}

/// Runs to completion and keeps every metrics row (and record, if traced).
/// Use [`run_with`] for long runs.
pub fn run(config: &SimulationConfig) -> Result<RunOutput> {
    let mut metrics = Vec::new();
    let mut records = Vec::new();
    let keep_records = config.record_level == RecordLevel::FullTrace;
    let summary = run_with(config, |view| {
        metrics.push(view.metrics.clone());
        if keep_records {
            if let Some(r) = view.record {
                records.push(r.clone());
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(RunOutput {
        summary,
        metrics,
        records,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::protocol::Ternary;

    fn pair_config(alpha: f64) -> SimulationConfig {
        let seq = GraphSequence::fixed(GraphSnapshot::complete(2));
        SimulationConfig::new(seq, ProtocolParams::practical(alpha).unwrap(), InitSpec::Spike, 10)
    }

    #[test]
    fn init_examples() {
        assert_eq!(InitSpec::Spike.values(4).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(InitSpec::Explicit(vec![0.2, 0.8]).values(2).unwrap(), vec![0.2, 0.8]);
        let u = InitSpec::UniformRandom {
            seed: 3,
            lo: -1.0,
            hi: 2.0,
        };
        let a = u.values(6).unwrap();
        assert_eq!(a, u.values(6).unwrap());
        assert!(a.iter().all(|v| (-1.0..2.0).contains(v)));
        assert!(InitSpec::Explicit(vec![1.0]).values(2).is_err());
        assert!(InitSpec::UniformRandom {
            seed: 0,
            lo: 1.0,
            hi: 1.0
        }
        .values(2)
        .is_err());
    }

    #[test]
    fn round_one_and_two_on_a_single_edge() {
        let config = pair_config(0.9);
        let mut world = init_state(&config).unwrap();

        let r1 = run_round(&mut world, 1, &config).unwrap();
        assert!(r1.messages.iter().all(|m| m.q == Ternary::Zero));
        assert!(r1.active_sets.iter().all(Vec::is_empty));
        assert_eq!(r1.x_post, vec![1.0, 0.0]);
        assert_eq!(r1.estimates[&(1, 0)].x_hat_in, 0.0);

        let r2 = run_round(&mut world, 2, &config).unwrap();
        let q01 = r2.messages.iter().find(|m| m.from == 0 && m.to == 1).unwrap().q;
        let q10 = r2.messages.iter().find(|m| m.from == 1 && m.to == 0).unwrap().q;
        assert_eq!(q01, Ternary::Plus);
        assert_eq!(q10, Ternary::Zero);
        assert_relative_eq!(r2.estimates[&(1, 0)].x_hat_in, 0.5358867312681466, max_relative = 1e-15);
        assert!(r2.active_sets.iter().all(Vec::is_empty));
        assert_eq!(r2.x_post, vec![1.0, 0.0]);
    }

    #[test]
    fn rounds_must_be_sequential() {
        let config = pair_config(0.9);
        let mut world = init_state(&config).unwrap();
        assert!(run_round(&mut world, 2, &config).is_err());
        assert!(run_round(&mut world, 0, &config).is_err());
    }

    #[test]
    fn consensus_is_a_fixed_point() {
        let seq = GraphSequence::fixed(GraphSnapshot::complete(4));
        let config = SimulationConfig::new(
            seq,
            ProtocolParams::theorem(0.25, 0.5).unwrap(),
            InitSpec::Explicit(vec![0.0; 4]),
            50,
        )
        .full_trace();
        let out = run(&config).unwrap();
        for r in &out.records {
            assert_eq!(r.nonzero_msgs(), 0);
            assert_eq!(r.active_edges(), 0);
            assert_eq!(r.x_post, r.x_pre);
        }
    }

    #[test]
    fn budget_contract() {
        let mut config = pair_config(0.9);
        config.t_max = 0;
        assert!(matches!(run(&config), Err(Error::Config(_))));
        config.t_max = 1;
        assert_eq!(run(&config).unwrap().metrics.len(), 1);
    }

    #[test]
    fn stop_condition_already_met() {
        let config = pair_config(0.9).stop_at(0.5);
        let out = run(&config).unwrap();
        assert_eq!(out.summary.first_hit, Some(0));
        assert!(out.metrics.is_empty());
    }

    #[test]
    fn fixed_policy_too_small_aborts() {
        let seq = GraphSequence::fixed(GraphSnapshot::complete(3));
        let params = ProtocolParams::theorem(0.25, 0.5)
            .unwrap()
            .with_policy(DegreeBoundPolicy::Fixed(2.0))
            .unwrap();
        let config = SimulationConfig::new(seq, params, InitSpec::Spike, 5);
        assert!(matches!(run(&config), Err(Error::PolicyViolation { .. })));
    }

    #[test]
    fn explicit_sequence_shorter_than_budget_fails() {
        let seq = GraphSequence::parse_explicit(2, "0-1\n0-1").unwrap();
        let config = SimulationConfig::new(seq, ProtocolParams::practical(0.9).unwrap(), InitSpec::Spike, 3);
        assert!(matches!(run(&config), Err(Error::OutOfRange { t: 3, len: 2 })));
    }
}
