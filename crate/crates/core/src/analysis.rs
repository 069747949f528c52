//! Dispersion metrics, the effective update matrix, per-round invariant
//! validation and the convergence-time bound.
//!
//! Tolerances: estimate mirrors are compared bitwise (both endpoints apply
//! identical operations in identical order), monotonicity and conservation
//! use 1e-12, matrix structure uses 1e-9.

use std::collections::BTreeMap;
use std::fmt;

use crate::engine::RoundRecord;
use crate::error::{argument, Error, Result};
use crate::graph::{Edge, NodeId};
use crate::protocol::{ProtocolParams, Variant};

pub const MONOTONE_TOL: f64 = 1e-12;
pub const MATRIX_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dispersion {
    pub max: f64,
    pub min: f64,
    /// `W = max − min`.
    pub spread: f64,
    /// Euclidean distance of `x` from its own mean.
    pub v2: f64,
    /// `max_i |x_i − avg0|`.
    pub err_max: f64,
}

pub fn compute_metrics(x: &[f64], avg0: f64) -> Result<Dispersion> {
    if x.is_empty() {
        return Err(argument("metrics of an empty vector"));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("metrics input contains {v}")));
    }
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = mean(x);
    let v2 = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>().sqrt();
    let err_max = x.iter().map(|v| (v - avg0).abs()).fold(0.0, f64::max);
    Ok(Dispersion {
        max,
        min,
        spread: max - min,
        v2,
        err_max,
    })
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// One line of `metrics.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub t: u64,
    pub max: f64,
    pub min: f64,
    pub spread: f64,
    pub v2: f64,
    pub err_max: f64,
    /// Unordered pairs that are in each other's active set.
    pub active_edges: usize,
    pub nonzero_msgs: usize,
}

impl MetricsRow {
    pub fn from_dispersion(t: u64, d: Dispersion, active_edges: usize, nonzero_msgs: usize) -> Self {
        MetricsRow {
            t,
            max: d.max,
            min: d.min,
            spread: d.spread,
            v2: d.v2,
            err_max: d.err_max,
            active_edges,
            nonzero_msgs,
        }
    }
}

/// Quantities of `x(0)` that the per-round checks compare against.
#[derive(Clone, Debug, PartialEq)]
pub struct Baseline {
    pub n: usize,
    pub avg0: f64,
    pub x_inf0: f64,
    pub w0: f64,
    pub v20: f64,
}

impl Baseline {
    pub fn from_initial(x0: &[f64]) -> Result<Self> {
        let avg0 = if x0.is_empty() { 0.0 } else { mean(x0) };
        let d = compute_metrics(x0, avg0)?;
        Ok(Baseline {
            n: x0.len(),
            avg0,
            x_inf0: x0.iter().map(|v| v.abs()).fold(0.0, f64::max),
            w0: d.spread,
            v20: d.v2,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    EstimateMirror,
    ActiveSetSymmetry,
    Monotonicity,
    EstimateBound,
    StepBound,
    Conservation,
    Symmetry,
    RowSum,
    ColumnSum,
    Nonnegativity,
    DiagonalDominance,
    EntryLowerBound,
    DegreeSupremum,
    WeightBounds,
    DegeneratePair,
}

impl Check {
    pub fn label(self) -> &'static str {
        match self {
            Check::EstimateMirror => "estimate mirror x̂_in(i,j) = x̂_out(j,i)",
            Check::ActiveSetSymmetry => "active-set symmetry j ∈ S(i) ⇔ i ∈ S(j)",
            Check::Monotonicity => "monotonicity of M, m, V2",
            Check::EstimateBound => "estimate bound |x̂_in| ≤ ‖x(0)‖∞",
            Check::StepBound => "step bound |Δx_i| ≤ W(0)/(2 t^β)",
            Check::Conservation => "average conservation",
            Check::Symmetry => "symmetry",
            Check::RowSum => "row sums equal 1",
            Check::ColumnSum => "column sums equal 1",
            Check::Nonnegativity => "nonnegative entries",
            Check::DiagonalDominance => "diagonal dominance a_ii ≥ 1/2",
            Check::EntryLowerBound => "positive entries a_ij ≥ 1/(8 D(i,j,t))",
            Check::DegreeSupremum => "D(i,j,t) ≤ D",
            Check::WeightBounds => "weights 2/3 ≤ w_ij ≤ 2",
            Check::DegeneratePair => "active pair with equal values",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub t: u64,
    pub check: Check,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] round {}: {}", self.check, self.t, self.detail)
    }
}

/// The matrix `A(t-1)` with `x(t) = (1 − s) x(t-1) + s A(t-1) x(t-1)`, where
/// `s = t^{-β}` (theorem variant) or `s = 1` (practical variant).
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveMatrix {
    pub t: u64,
    pub n: usize,
    pub variant: Variant,
    pub step: f64,
    entries: Vec<f64>,
    /// `w_ij(t-1)` for every ordered active pair.
    pub w: BTreeMap<(NodeId, NodeId), f64>,
    /// `D(i,j,t)` for every active pair.
    pub d_bounds: BTreeMap<Edge, f64>,
}

impl EffectiveMatrix {
    pub fn identity(t: u64, n: usize, variant: Variant, step: f64) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        EffectiveMatrix {
            t,
            n,
            variant,
            step,
            entries,
            w: BTreeMap::new(),
            d_bounds: BTreeMap::new(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// `(1 − s) x + s A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let ax: f64 = self.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
                (1.0 - self.step) * x[i] + self.step * ax
            })
            .collect()
    }
}

/// Recovers `A(t-1)` from a recorded round.
///
/// `w_ij = (x̂_in − x̂_out) / (x_j(t-1) − x_i(t-1))` and
/// `a_ij = w_ij / (c D(i,j,t))` with `c = 4` (theorem) or `c = 2` (practical).
pub fn reconstruct_matrix(record: &RoundRecord, params: &ProtocolParams) -> Result<EffectiveMatrix> {
    let n = record.x_pre.len();
    let (step, factor) = match params.variant {
        Variant::Theorem => (1.0 / params.step_scale(record.t), 4.0),
        Variant::Practical => (1.0, 2.0),
    };
    let mut mat = EffectiveMatrix::identity(record.t, n, params.variant, step);
    for (i, set) in record.active_sets.iter().enumerate() {
        let mut off_diagonal = 0.0;
        for &j in set {
            let e = Edge::new(i, j)?;
            let denom = record.x_pre[j] - record.x_pre[i];
            if denom == 0.0 {
                return Err(Error::DegeneratePair {
                    a: e.lo(),
                    b: e.hi(),
                    t: record.t,
                });
            }
            let est = record
                .estimates
                .get(&(i, j))
                .ok_or_else(|| argument(format!("no estimates recorded for {i} about {j}")))?;
            let d = *record
                .d_bounds
                .get(&e)
                .ok_or_else(|| argument(format!("no degree bound recorded for {e}")))?;
            let w = (est.x_hat_in - est.x_hat_out) / denom;
            let a = w / (factor * d);
            mat.set(i, j, a);
            mat.w.insert((i, j), w);
            mat.d_bounds.insert(e, d);
            off_diagonal += a;
        }
        mat.set(i, i, 1.0 - off_diagonal);
    }
    Ok(mat)
}

/// Structural checks on `A(t-1)` at tolerance [`MATRIX_TOL`].
///
/// Always: symmetry, unit row and column sums, nonnegativity. Theorem
/// variant additionally: `a_ii ≥ 1/2`, positive `a_ij ≥ 1/(8 D(i,j,t))`,
/// `D(i,j,t) ≤ d_sup` and `w_ij ∈ [2/3, 2]`.
pub fn validate_matrix(mat: &EffectiveMatrix, d_sup: f64) -> Vec<Violation> {
    let n = mat.n;
    let tol = MATRIX_TOL;
    let mut out = Vec::new();
    let mut flag = |check, detail: String| {
        out.push(Violation {
            t: mat.t,
            check,
            detail,
        })
    };
    for i in 0..n {
        let row: f64 = mat.row(i).iter().sum();
        if (row - 1.0).abs() > tol {
            flag(Check::RowSum, format!("row {i} sums to {row}"));
        }
        let col: f64 = (0..n).map(|k| mat.get(k, i)).sum();
        if (col - 1.0).abs() > tol {
            flag(Check::ColumnSum, format!("column {i} sums to {col}"));
        }
        for j in 0..n {
            let a = mat.get(i, j);
            if j > i && (a - mat.get(j, i)).abs() > tol {
                flag(
                    Check::Symmetry,
                    format!("a[{i}][{j}] = {a} but a[{j}][{i}] = {}", mat.get(j, i)),
                );
            }
            if a < -tol {
                flag(Check::Nonnegativity, format!("a[{i}][{j}] = {a}"));
            }
        }
    }
    if mat.variant == Variant::Practical {
        return out;
    }
    for i in 0..n {
        let a = mat.get(i, i);
        if a < 0.5 - tol {
            flag(Check::DiagonalDominance, format!("a[{i}][{i}] = {a}"));
        }
    }
    for (e, &d) in &mat.d_bounds {
        if d > d_sup + tol {
            flag(Check::DegreeSupremum, format!("D({e}) = {d} exceeds {d_sup}"));
        }
        for (i, j) in [(e.lo(), e.hi()), (e.hi(), e.lo())] {
            let a = mat.get(i, j);
            if a > 0.0 && a < 1.0 / (8.0 * d) - tol {
                flag(Check::EntryLowerBound, format!("a[{i}][{j}] = {a} with D = {d}"));
            }
        }
    }
    for (&(i, j), &w) in &mat.w {
        if !(2.0 / 3.0 - tol..=2.0 + tol).contains(&w) {
            flag(Check::WeightBounds, format!("w[{i}][{j}] = {w}"));
        }
    }
    out
}

/// Checks one recorded round against the previous round's metrics.
pub fn validate_round(
    record: &RoundRecord,
    prev: &MetricsRow,
    params: &ProtocolParams,
    baseline: &Baseline,
) -> Vec<Violation> {
    let t = record.t;
    let mut out = Vec::new();
    let mut flag = |check, detail: String| out.push(Violation { t, check, detail });

    for (&(i, j), est) in &record.estimates {
        match record.estimates.get(&(j, i)) {
            None => flag(
                Check::EstimateMirror,
                format!("node {i} tracks {j} but {j} does not track {i}"),
            ),
            Some(other) if est.x_hat_in.to_bits() != other.x_hat_out.to_bits() => flag(
                Check::EstimateMirror,
                format!(
                    "x̂_in({i},{j}) = {} but x̂_out({j},{i}) = {}",
                    est.x_hat_in, other.x_hat_out
                ),
            ),
            Some(_) => {}
        }
        if est.x_hat_in.abs() > baseline.x_inf0 + MONOTONE_TOL {
            flag(
                Check::EstimateBound,
                format!("|x̂_in({i},{j})| = {} > {}", est.x_hat_in.abs(), baseline.x_inf0),
            );
        }
    }

    for (i, set) in record.active_sets.iter().enumerate() {
        for &j in set {
            if !record.active_sets.get(j).is_some_and(|s| s.binary_search(&i).is_ok()) {
                flag(Check::ActiveSetSymmetry, format!("{j} ∈ S({i}) but {i} ∉ S({j})"));
            }
        }
    }

    match compute_metrics(&record.x_post, baseline.avg0) {
        Err(e) => flag(Check::Monotonicity, format!("metrics unavailable: {e}")),
        Ok(d) => {
            if d.max > prev.max + MONOTONE_TOL {
                flag(Check::Monotonicity, format!("M rose from {} to {}", prev.max, d.max));
            }
            if d.min < prev.min - MONOTONE_TOL {
                flag(Check::Monotonicity, format!("m fell from {} to {}", prev.min, d.min));
            }
            if d.v2 > prev.v2 + MONOTONE_TOL {
                flag(Check::Monotonicity, format!("V2 rose from {} to {}", prev.v2, d.v2));
            }
        }
    }

    let drift = (mean(&record.x_post) - baseline.avg0).abs();
    if drift > MONOTONE_TOL * baseline.x_inf0.max(1.0) {
        flag(Check::Conservation, format!("mean drifted by {drift}"));
    }

    if params.variant == Variant::Theorem {
        let limit = 0.5 * baseline.w0 / params.step_scale(t) + MONOTONE_TOL;
        for (i, (pre, post)) in record.x_pre.iter().zip(&record.x_post).enumerate() {
            if (post - pre).abs() > limit {
                flag(
                    Check::StepBound,
                    format!("node {i} moved {} > {limit}", (post - pre).abs()),
                );
            }
        }
    }

    match reconstruct_matrix(record, params) {
        Ok(mat) => out.extend(validate_matrix(&mat, params.degree_policy.supremum(baseline.n))),
        Err(Error::DegeneratePair { a, b, .. }) => out.push(Violation {
            t,
            check: Check::DegeneratePair,
            detail: format!("x_{a}(t-1) = x_{b}(t-1)"),
        }),
        Err(e) => out.push(Violation {
            t,
            check: Check::Symmetry,
            detail: format!("matrix reconstruction failed: {e}"),
        }),
    }
    out
}

/// Stateful wrapper around [`validate_round`] that carries the previous
/// round's metrics forward.
#[derive(Clone, Debug)]
pub struct RoundValidator {
    params: ProtocolParams,
    baseline: Baseline,
    prev: MetricsRow,
}

impl RoundValidator {
    pub fn new(params: ProtocolParams, baseline: Baseline, initial: MetricsRow) -> Self {
        RoundValidator {
            params,
            baseline,
            prev: initial,
        }
    }

    pub fn check(&mut self, record: &RoundRecord) -> Vec<Violation> {
        let violations = validate_round(record, &self.prev, &self.params, &self.baseline);
        if let Ok(d) = compute_metrics(&record.x_post, self.baseline.avg0) {
            self.prev = MetricsRow::from_dispersion(record.t, d, record.active_edges(), record.nonzero_msgs());
        }
        violations
    }
}

/// Inputs of the convergence-time bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    /// Core-connectivity block length `B`.
    pub block: usize,
    /// `D = sup D(i,j,t)`.
    pub d_sup: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub w0: f64,
    pub v20: f64,
    pub x_inf0: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(argument(what.to_string()));
        if self.n < 2 {
            return fail("n ≥ 2");
        }
        if self.block < 1 {
            return fail("B ≥ 1");
        }
        if !(self.d_sup.is_finite() && self.d_sup >= 1.0) {
            return fail("D ≥ 1");
        }
        if !(0.0 < self.alpha && self.alpha < self.beta && self.beta < 1.0) {
            return fail("0 < alpha < beta < 1");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return fail("eps > 0");
        }
        for (name, v) in [("w0", self.w0), ("v20", self.v20), ("xinf", self.x_inf0)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(argument(format!("{name} must be a finite nonnegative real")));
            }
        }
        Ok(())
    }
}

/// The additive terms of the bound; [`BoundTerms::total`] is the round count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundTerms {
    /// `2^{1/(1-β)} 2^{2/(1-α)} ⌈32B + 8B W(0)⌉^{1/(β-α)}`
    pub transient_estimate: f64,
    /// `2^{1/(1-β)} (32B ‖x(0)‖∞)^{2/(1-α)}`
    pub transient_init: f64,
    /// `2^{1/(1-β)} (11B + (300 n³ D B)^{1/(1-β)})`
    pub transient_mix: f64,
    /// `(150 n³ D B ln(V2(0)/ε))^{1/(1-β)}`, zero when `ε ≥ V2(0)`.
    pub steady_log: f64,
    /// `(8 n^{1.5} / ε)^{1/α}`
    pub steady_power: f64,
}

impl BoundTerms {
    pub fn total(&self) -> f64 {
        self.transient_estimate + self.transient_init + self.transient_mix + self.steady_log.max(self.steady_power)
    }

    pub fn labeled(&self) -> [(&'static str, f64); 5] {
        [
            ("transient-estimate", self.transient_estimate),
            ("transient-init", self.transient_init),
            ("transient-mix", self.transient_mix),
            ("steady-log", self.steady_log),
            ("steady-power", self.steady_power),
        ]
    }
}

/// Number of rounds after which `V2(x(t)) ≤ ε` is guaranteed.
pub fn theorem_bound(inputs: &BoundInputs) -> Result<BoundTerms> {
    inputs.validate()?;
    let BoundInputs {
        n,
        block,
        d_sup,
        alpha,
        beta,
        epsilon,
        w0,
        v20,
        x_inf0,
    } = *inputs;
    let n = n as f64;
    let b = block as f64;
    let lead = 2f64.powf(1.0 / (1.0 - beta));
    let mix_base = n.powi(3) * d_sup * b;

    let terms = BoundTerms {
        transient_estimate: lead
            * 2f64.powf(2.0 / (1.0 - alpha))
            * (32.0 * b + 8.0 * b * w0).ceil().powf(1.0 / (beta - alpha)),
        transient_init: lead * (32.0 * b * x_inf0).powf(2.0 / (1.0 - alpha)),
        transient_mix: lead * (11.0 * b + (300.0 * mix_base).powf(1.0 / (1.0 - beta))),
        steady_log: if v20 > 0.0 && epsilon < v20 {
            (150.0 * mix_base * (v20 / epsilon).ln()).powf(1.0 / (1.0 - beta))
        } else {
            0.0
        },
        steady_power: (8.0 * n.powf(1.5) / epsilon).powf(1.0 / alpha),
    };
    for (label, v) in terms.labeled() {
        if !v.is_finite() {
            return Err(Error::BoundOverflow(label));
        }
    }
    if !terms.total().is_finite() {
        return Err(Error::BoundOverflow("total"));
    }
    Ok(terms)
}

/// Whether `V2 ≥ 8 n^{1.5} / t^α`, the regime where each block of rounds is
/// guaranteed to contract `V2` by a constant factor. Below it the quantized
/// estimates are too coarse for that guarantee. Diagnostic only; nothing
/// asserts it.
pub fn above_quantization_floor(v2: f64, n: usize, t: u64, alpha: f64) -> bool {
    v2 >= 8.0 * (n as f64).powf(1.5) / (t as f64).powf(alpha)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn quantization_floor_shrinks_with_time() {
        assert!(!above_quantization_floor(1.0, 1, 1, 0.5));
        assert!(above_quantization_floor(1.0, 1, 64, 0.5));
        assert!(!above_quantization_floor(1.0, 4, 64, 0.5));
    }

    #[test]
    fn metrics_examples() {
        let c = compute_metrics(&[2.0, 2.0, 2.0], 1.5).unwrap();
        assert_eq!((c.spread, c.v2, c.err_max), (0.0, 0.0, 0.5));

        let d = compute_metrics(&[0.0, 1.0], 0.5).unwrap();
        assert_eq!((d.max, d.min, d.spread, d.err_max), (1.0, 0.0, 1.0, 0.5));
        assert_relative_eq!(d.v2, 0.5f64.sqrt(), max_relative = 1e-15);

        let s = compute_metrics(&[1.0, 0.0, 0.0, 0.0], 0.25).unwrap();
        assert_relative_eq!(s.v2, 0.75f64.sqrt(), max_relative = 1e-15);

        assert!(compute_metrics(&[], 0.0).is_err());
        assert!(compute_metrics(&[f64::NAN], 0.0).is_err());
    }

    #[test]
    fn identity_passes_validation() {
        let id = EffectiveMatrix::identity(3, 4, Variant::Theorem, 0.5);
        assert!(validate_matrix(&id, 4.0).is_empty());
    }

    #[test]
    fn weak_diagonal_is_flagged() {
        let mut m = EffectiveMatrix::identity(1, 2, Variant::Theorem, 1.0);
        m.set(0, 0, 0.4);
        m.set(0, 1, 0.6);
        m.set(1, 0, 0.6);
        m.set(1, 1, 0.4);
        let v = validate_matrix(&m, 2.0);
        assert!(v.iter().any(|v| v.check == Check::DiagonalDominance));
        assert_eq!(Check::DiagonalDominance.label(), "diagonal dominance a_ii ≥ 1/2");
        // The practical variant makes no dominance claim.
        m.variant = Variant::Practical;
        assert!(validate_matrix(&m, 2.0).is_empty());
    }

    #[test]
    fn asymmetric_matrix_is_flagged() {
        let mut m = EffectiveMatrix::identity(1, 3, Variant::Theorem, 1.0);
        m.set(0, 0, 0.9);
        m.set(0, 1, 0.1);
        let v = validate_matrix(&m, 3.0);
        assert!(v.iter().any(|v| v.check == Check::Symmetry));
        assert!(v.iter().any(|v| v.check == Check::ColumnSum));
    }

    #[test]
    fn weights_outside_band_are_flagged() {
        let mut m = EffectiveMatrix::identity(1, 2, Variant::Theorem, 1.0);
        m.w.insert((0, 1), 2.5);
        assert!(validate_matrix(&m, 2.0).iter().any(|v| v.check == Check::WeightBounds));
    }

    #[test]
    fn bound_reference_value() {
        // Frozen from the mpmath oracle in tests/oracle/.
        let inputs = BoundInputs {
            n: 3,
            block: 1,
            d_sup: 3.0,
            alpha: 0.25,
            beta: 0.5,
            epsilon: 0.1,
            w0: 1.0,
            v20: 0.8660254,
            x_inf0: 1.0,
        };
        let t = theorem_bound(&inputs).unwrap().total();
        assert_relative_eq!(t, 3.228_686_127_618_157e10, max_relative = 1e-12);
    }

    #[test]
    fn bound_log_term_clamps() {
        let mut inputs = BoundInputs {
            n: 4,
            block: 2,
            d_sup: 4.0,
            alpha: 0.25,
            beta: 0.5,
            epsilon: 1.0,
            w0: 1.0,
            v20: 0.5,
            x_inf0: 1.0,
        };
        assert_eq!(theorem_bound(&inputs).unwrap().steady_log, 0.0);
        inputs.v20 = 0.0;
        assert_eq!(theorem_bound(&inputs).unwrap().steady_log, 0.0);
        inputs.v20 = 3.0;
        assert!(theorem_bound(&inputs).unwrap().steady_log > 0.0);
    }

    #[test]
    fn bound_domain_errors() {
        let ok = BoundInputs {
            n: 3,
            block: 1,
            d_sup: 3.0,
            alpha: 0.25,
            beta: 0.5,
            epsilon: 0.1,
            w0: 1.0,
            v20: 0.8,
            x_inf0: 1.0,
        };
        assert!(theorem_bound(&ok).is_ok());
        for bad in [
            BoundInputs { n: 1, ..ok },
            BoundInputs { block: 0, ..ok },
            BoundInputs { d_sup: 0.5, ..ok },
            BoundInputs { alpha: 0.5, ..ok },
            BoundInputs { beta: 1.0, ..ok },
            BoundInputs { epsilon: 0.0, ..ok },
            BoundInputs { w0: -1.0, ..ok },
        ] {
            assert!(matches!(theorem_bound(&bad), Err(Error::Argument(_))), "{bad:?}");
        }
        let huge = BoundInputs {
            alpha: 0.5,
            beta: 0.5000001,
            ..ok
        };
        assert!(matches!(theorem_bound(&huge), Err(Error::BoundOverflow(_))));
    }
}
