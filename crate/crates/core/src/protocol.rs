//! Per-node protocol state machine.
//!
//! A node only ever reads its own value, its own estimate ledger and the
//! ternary symbols it receives. Everything that crosses between nodes is a
//! [`Message`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{argument, Error, Result};
use crate::graph::{Edge, GraphSnapshot, NodeId};

/// A symbol of the message alphabet `{-1, 0, +1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum Ternary {
    Minus = -1,
    Zero = 0,
    Plus = 1,
}

impl Ternary {
    pub fn as_i8(self) -> i8 {
        self as i8
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self as i8)
    }

    pub fn is_zero(self) -> bool {
        self == Ternary::Zero
    }
}

impl fmt::Display for Ternary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// The quantizer: `+1` above 1, `-1` below -1, `0` on the closed band `[-1, 1]`.
pub fn quantize(v: f64) -> Result<Ternary> {
    if !v.is_finite() {
        return Err(Error::Numeric(format!("quantizer input {v}")));
    }
    Ok(if v > 1.0 {
        Ternary::Plus
    } else if v < -1.0 {
        Ternary::Minus
    } else {
        Ternary::Zero
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Stepsize `1/t^β` and denominator `4 D(i,j,t)`.
    Theorem,
    /// No stepsize and denominator `2 max(d_i, d_j)`.
    Practical,
}

/// How the engine picks the symmetric per-edge degree bound `D(i,j,t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DegreeBoundPolicy {
    MaxDegree,
    GlobalN,
    Fixed(f64),
}

impl DegreeBoundPolicy {
    /// `D(i,j,t)` for an edge of `g`. Fails if a fixed bound is below the
    /// larger endpoint degree.
    pub fn bound(&self, g: &GraphSnapshot, e: Edge, t: u64) -> Result<PairBound> {
        let max_degree = g.degree(e.lo())?.max(g.degree(e.hi())?);
        let bound = match *self {
            DegreeBoundPolicy::MaxDegree => max_degree as f64,
            DegreeBoundPolicy::GlobalN => g.n() as f64,
            DegreeBoundPolicy::Fixed(c) => c,
        };
        if bound < max_degree as f64 {
            return Err(Error::PolicyViolation {
                a: e.lo(),
                b: e.hi(),
                t,
                bound,
                max_degree,
            });
        }
        Ok(PairBound { bound, max_degree })
    }

    /// Upper bound on every `D(i,j,t)` this policy can produce on `n` nodes.
    pub fn supremum(&self, n: usize) -> f64 {
        match *self {
            DegreeBoundPolicy::MaxDegree | DegreeBoundPolicy::GlobalN => n as f64,
            DegreeBoundPolicy::Fixed(c) => c.max(n as f64),
        }
    }
}

/// The degree bound for one edge as handed to both endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBound {
    pub bound: f64,
    pub max_degree: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolParams {
    pub alpha: f64,
    pub beta: f64,
    pub variant: Variant,
    pub degree_policy: DegreeBoundPolicy,
    /// Forget peers not seen for more than this many rounds.
    pub prune_horizon: Option<u64>,
}

impl ProtocolParams {
    pub fn theorem(alpha: f64, beta: f64) -> Result<Self> {
        let p = ProtocolParams {
            alpha,
            beta,
            variant: Variant::Theorem,
            degree_policy: DegreeBoundPolicy::MaxDegree,
            prune_horizon: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn practical(alpha: f64) -> Result<Self> {
        let p = ProtocolParams {
            alpha,
            beta: 0.0,
            variant: Variant::Practical,
            degree_policy: DegreeBoundPolicy::MaxDegree,
            prune_horizon: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_policy(mut self, policy: DegreeBoundPolicy) -> Result<Self> {
        self.degree_policy = policy;
        self.validate()?;
        Ok(self)
    }

    pub fn with_prune_horizon(mut self, horizon: u64) -> Result<Self> {
        self.prune_horizon = Some(horizon);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(argument(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        match self.variant {
            Variant::Theorem => {
                if !(self.alpha < self.beta && self.beta < 1.0) {
                    return Err(argument(format!(
                        "theorem variant needs 0 < alpha < beta < 1, got alpha = {}, beta = {}",
                        self.alpha, self.beta
                    )));
                }
            }
            Variant::Practical => {
                if self.beta != 0.0 {
                    return Err(argument(format!("practical variant needs beta = 0, got {}", self.beta)));
                }
            }
        }
        if let DegreeBoundPolicy::Fixed(c) = self.degree_policy {
            if !(c.is_finite() && c > 0.0) {
                return Err(argument(format!("fixed degree bound {c} must be a positive real")));
            }
        }
        if self.prune_horizon == Some(0) {
            return Err(argument("prune horizon must be positive"));
        }
        Ok(())
    }

    /// `t^α`.
    pub fn estimate_scale(&self, t: u64) -> f64 {
        (t as f64).powf(self.alpha)
    }

    /// `t^β`; identically 1 for the practical variant.
    pub fn step_scale(&self, t: u64) -> f64 {
        match self.variant {
            Variant::Theorem => (t as f64).powf(self.beta),
            Variant::Practical => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerEntry {
    /// Local reconstruction of the peer's value.
    pub x_hat_in: f64,
    /// Local copy of the peer's reconstruction of our value.
    pub x_hat_out: f64,
    pub first_seen: u64,
    pub last_seen: u64,
}

impl LedgerEntry {
    pub fn gap(&self) -> f64 {
        self.x_hat_in - self.x_hat_out
    }
}

/// Per-peer estimate pairs, keyed by peer id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EstimateLedger {
    entries: BTreeMap<NodeId, LedgerEntry>,
}

impl EstimateLedger {
    pub fn get(&self, peer: NodeId) -> Option<&LedgerEntry> {
        self.entries.get(&peer)
    }

    pub fn contains(&self, peer: NodeId) -> bool {
        self.entries.contains_key(&peer)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &LedgerEntry)> {
        self.entries.iter().map(|(&j, e)| (j, e))
    }

    /// Test hook for fault injection.
    #[doc(hidden)]
    pub fn get_mut(&mut self, peer: NodeId) -> Option<&mut LedgerEntry> {
        self.entries.get_mut(&peer)
    }
}

/// One ternary symbol on a directed edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Message {
    pub from: NodeId,
    pub to: NodeId,
    pub q: Ternary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub x: f64,
    pub ledger: EstimateLedger,
}

impl NodeState {
    pub fn new(id: NodeId, x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Numeric(format!("initial value of node {id} is {x}")));
        }
        Ok(NodeState {
            id,
            x,
            ledger: EstimateLedger::default(),
        })
    }

    /// Creates a zeroed ledger entry for `peer` if none exists; returns whether
    /// one was created.
    pub fn open_link(&mut self, peer: NodeId, t: u64) -> bool {
        let mut created = false;
        self.ledger.entries.entry(peer).or_insert_with(|| {
            created = true;
            LedgerEntry {
                x_hat_in: 0.0,
                x_hat_out: 0.0,
                first_seen: t,
                last_seen: t,
            }
        });
        created
    }

    /// `q = R[t^α (x − x̂_out)]` for `peer`. Reads the time-(t-1) state only.
    pub fn compute_message(&self, peer: NodeId, t: u64, params: &ProtocolParams) -> Result<Message> {
        let entry = self.entry(peer, t)?;
        let q = quantize(params.estimate_scale(t) * (self.x - entry.x_hat_out))?;
        Ok(Message {
            from: self.id,
            to: peer,
            q,
        })
    }

    /// Moves both estimates of every adjacent peer by `q / t^α`, leaves all
    /// other entries untouched, then drops entries older than the prune horizon.
    pub fn apply_messages(
        &mut self,
        t: u64,
        adjacency: &[NodeId],
        sent: &[Message],
        received: &[Message],
        params: &ProtocolParams,
    ) -> Result<()> {
        let (out_q, in_q) = self.align(t, adjacency, sent, received)?;
        let scale = params.estimate_scale(t);
        for (k, &peer) in adjacency.iter().enumerate() {
            let id = self.id;
            let entry = self
                .ledger
                .entries
                .get_mut(&peer)
                .ok_or(Error::ProtocolOrder { node: id, peer, t })?;
            entry.x_hat_out += out_q[k].as_f64() / scale;
            entry.x_hat_in += in_q[k].as_f64() / scale;
            entry.last_seen = t;
        }
        if let Some(horizon) = params.prune_horizon {
            self.ledger.entries.retain(|_, e| e.last_seen + horizon >= t);
        }
        Ok(())
    }

    /// Peers `j` adjacent at `t` with both symbols zero and
    /// `|x̂_in − x̂_out| > 4/t^α`, ascending. Call after [`apply_messages`].
    ///
    /// [`apply_messages`]: NodeState::apply_messages
    pub fn active_set(
        &self,
        t: u64,
        adjacency: &[NodeId],
        sent: &[Message],
        received: &[Message],
        params: &ProtocolParams,
    ) -> Result<Vec<NodeId>> {
        let (out_q, in_q) = self.align(t, adjacency, sent, received)?;
        let threshold = 4.0 / params.estimate_scale(t);
        let mut active = Vec::new();
        for (k, &peer) in adjacency.iter().enumerate() {
            if !(out_q[k].is_zero() && in_q[k].is_zero()) {
                continue;
            }
            if self.entry(peer, t)?.gap().abs() > threshold {
                active.push(peer);
            }
        }
        Ok(active)
    }

    /// Moves `x` toward the active peers' estimates. Sums in ascending peer
    /// order; `bounds` must hold an entry for every active peer.
    pub fn value_update(
        &mut self,
        t: u64,
        active: &[NodeId],
        bounds: &BTreeMap<NodeId, PairBound>,
        params: &ProtocolParams,
    ) -> Result<()> {
        let mut peers = active.to_vec();
        peers.sort_unstable();
        let mut sum = 0.0;
        for &peer in &peers {
            let gap = self.entry(peer, t)?.gap();
            let pb = bounds
                .get(&peer)
                .ok_or(Error::ProtocolOrder { node: self.id, peer, t })?;
            if pb.bound < pb.max_degree as f64 {
                return Err(Error::PolicyViolation {
                    a: self.id.min(peer),
                    b: self.id.max(peer),
                    t,
                    bound: pb.bound,
                    max_degree: pb.max_degree,
                });
            }
            sum += match params.variant {
                Variant::Theorem => gap / (4.0 * pb.bound),
                Variant::Practical => gap / (2.0 * pb.max_degree as f64),
            };
        }
        if !peers.is_empty() {
            self.x += sum / params.step_scale(t);
        }
        Ok(())
    }

    fn entry(&self, peer: NodeId, t: u64) -> Result<&LedgerEntry> {
        self.ledger
            .get(peer)
            .ok_or(Error::ProtocolOrder { node: self.id, peer, t })
    }

    /// Lines up outgoing and incoming symbols with `adjacency`, rejecting any
    /// message that does not belong to this node's round.
    fn align(
        &self,
        t: u64,
        adjacency: &[NodeId],
        sent: &[Message],
        received: &[Message],
    ) -> Result<(Vec<Ternary>, Vec<Ternary>)> {
        let violation = |detail: String| Error::ProtocolViolation {
            node: self.id,
            t,
            detail,
        };
        if let Some(m) = received.iter().find(|m| m.to != self.id) {
            return Err(violation(format!("received a message addressed to {}", m.to)));
        }
        if let Some(m) = sent.iter().find(|m| m.from != self.id) {
            return Err(violation(format!("sent list holds a message from {}", m.from)));
        }
        let aligned = |msgs: &[Message], peer_of: fn(&Message) -> NodeId, what: &str| -> Result<Vec<Ternary>> {
            if msgs.len() == adjacency.len() && msgs.iter().zip(adjacency).all(|(m, &p)| peer_of(m) == p) {
                return Ok(msgs.iter().map(|m| m.q).collect());
            }
            let mut by_peer = BTreeMap::new();
            for m in msgs {
                let peer = peer_of(m);
                if adjacency.binary_search(&peer).is_err() {
                    return Err(violation(format!("{what} message with non-adjacent peer {peer}")));
                }
                if by_peer.insert(peer, m.q).is_some() {
                    return Err(violation(format!("duplicate {what} message with peer {peer}")));
                }
            }
            adjacency
                .iter()
                .map(|p| {
                    by_peer
                        .get(p)
                        .copied()
                        .ok_or_else(|| violation(format!("missing {what} message with peer {p}")))
                })
                .collect()
        };
        Ok((
            aligned(sent, |m| m.to, "outgoing")?,
            aligned(received, |m| m.from, "incoming")?,
        ))
    }
}
