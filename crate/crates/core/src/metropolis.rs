//! Real-valued Metropolis iteration, the unquantized baseline.
//!
//! `x_i(t) = x_i(t-1) + Σ_{j ∈ N_i(t)} (x_j(t-1) − x_i(t-1)) / D(i,j,t)`, run
//! over the same graph sequences and degree-bound policies as the protocol.

use crate::analysis::{compute_metrics, mean, MetricsRow};
use crate::engine::InitSpec;
use crate::error::{argument, Error, Result};
use crate::graph::{GraphSequence, GraphSnapshot};
use crate::protocol::DegreeBoundPolicy;

#[derive(Clone, Debug, PartialEq)]
pub struct MetropolisConfig {
    pub seq: GraphSequence,
    pub degree_policy: DegreeBoundPolicy,
    pub init: InitSpec,
    pub t_max: u64,
}

/// One simultaneous update of every node from the time-(t-1) vector.
pub fn metropolis_round(x: &[f64], g: &GraphSnapshot, policy: DegreeBoundPolicy, t: u64) -> Result<Vec<f64>> {
    if x.len() != g.n() {
        return Err(argument(format!(
            "vector of length {} on a graph of {} nodes",
            x.len(),
            g.n()
        )));
    }
    let mut next = x.to_vec();
    for &e in g.edges() {
        let d = policy
            .bound(g, e, t)
            .map_err(|err| Error::Config(err.to_string()))?
            .bound;
        let (i, j) = (e.lo(), e.hi());
        let flow = (x[j] - x[i]) / d;
        next[i] += flow;
        next[j] -= flow;
    }
    Ok(next)
}

/// Metrics rows for rounds `1..=t_max`. `active_edges` reports the edge
/// count of `G(t)` and `nonzero_msgs` is always 0.
pub fn run_metropolis(config: &MetropolisConfig) -> Result<Vec<MetricsRow>> {
    if config.t_max == 0 {
        return Err(Error::Config("t_max must be at least 1".into()));
    }
    let mut x = config.init.values(config.seq.n())?;
    let avg0 = mean(&x);
    let mut rows = Vec::with_capacity(config.t_max as usize);
    for t in 1..=config.t_max {
        let g = config.seq.snapshot(t)?;
        x = metropolis_round(&x, &g, config.degree_policy, t)?;
        rows.push(MetricsRow::from_dispersion(
            t,
            compute_metrics(&x, avg0)?,
            g.edge_count(),
            0,
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_vector_is_fixed() {
        let g = GraphSnapshot::complete(5);
        let x = vec![0.7; 5];
        assert_eq!(metropolis_round(&x, &g, DegreeBoundPolicy::MaxDegree, 1).unwrap(), x);
    }

    #[test]
    fn single_edge_averages_in_one_step() {
        let g = GraphSnapshot::complete(2);
        let next = metropolis_round(&[0.0, 1.0], &g, DegreeBoundPolicy::MaxDegree, 1).unwrap();
        assert_eq!(next, vec![0.5, 0.5]);
    }

    #[test]
    fn edgeless_round_changes_nothing() {
        let config = MetropolisConfig {
            seq: GraphSequence::fixed(GraphSnapshot::edgeless(3)),
            degree_policy: DegreeBoundPolicy::MaxDegree,
            init: InitSpec::Explicit(vec![0.0, 1.0, 5.0]),
            t_max: 4,
        };
        let rows = run_metropolis(&config).unwrap();
        assert!(rows.iter().all(|r| r.max == 5.0 && r.min == 0.0 && r.active_edges == 0));
    }

    #[test]
    fn low_fixed_bound_is_a_config_error() {
        let g = GraphSnapshot::complete(4);
        let err = metropolis_round(&[0.0; 4], &g, DegreeBoundPolicy::Fixed(2.0), 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
