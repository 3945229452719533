//! Radial feeder synthesis over a scored candidate graph: a minimum-cost
//! tree that contains the source and every required node, found either by an
//! exact branch-and-bound or by a path-joining heuristic, plus an
//! independent dynamic-programming oracle for small terminal sets.

mod dual_ascent;
mod exact;
mod heuristic;
mod sph;
mod steiner;
mod sub;

pub use exact::{solve_exact, solve_exact_with, ExactOptions};
pub use heuristic::solve_heuristic;
pub use steiner::{steiner_oracle, MAX_ORACLE_TERMINALS};

use crate::geograph::{CandidateGraph, GeoPoint, NodeId, RoadClass};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Index of an edge in its candidate graph.
pub type EdgeId = usize;

/// Objective weights: cost of an edge is
/// `alpha_geo * c_geo + alpha_top + alpha_elec * d` with
/// `c_geo = lambda_c * c_cls + lambda_b * c_bend`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaWeights<F> {
    pub alpha_geo: F,
    /// Fixed cost per edge, favouring shallow trees.
    pub alpha_top: F,
    /// Cost per metre of conductor.
    pub alpha_elec: F,
}

impl<F: Scalar> Default for AlphaWeights<F> {
    fn default() -> Self {
        AlphaWeights {
            alpha_geo: F::one(),
            alpha_top: F::of(0.5),
            alpha_elec: F::of(0.005),
        }
    }
}

impl<F: Scalar> AlphaWeights<F> {
    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, v) in [
            ("alpha_geo", self.alpha_geo),
            ("alpha_top", self.alpha_top),
            ("alpha_elec", self.alpha_elec),
        ] {
            if !v.is_finite() || v < F::zero() {
                return Err(SynthError::InvalidAlpha(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.alpha_geo == F::zero() && self.alpha_top == F::zero() && self.alpha_elec == F::zero()
        {
            return Err(SynthError::InvalidAlpha(
                "at least one alpha must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// A feeder synthesis instance: scored candidate graph, source, required
/// nodes and objective weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisProblem<F> {
    pub graph: CandidateGraph<F>,
    pub source: NodeId,
    pub required: BTreeSet<NodeId>,
    pub alpha: AlphaWeights<F>,
    /// Flow capacity constant; defaults to `|nodes| - 1`, the tightest value
    /// that never binds on a connected solution.
    pub big_m: F,
}

impl<F: Scalar> SynthesisProblem<F> {
    pub fn new(
        graph: CandidateGraph<F>,
        source: NodeId,
        required: BTreeSet<NodeId>,
        alpha: AlphaWeights<F>,
    ) -> Result<Self, SynthError> {
        alpha.validate()?;
        if graph.nodes.is_empty() {
            return Err(SynthError::Empty);
        }
        if graph.weights.is_none() {
            return Err(SynthError::Unscored);
        }
        if !graph.nodes.contains_key(&source) {
            return Err(SynthError::UnknownNode(source));
        }
        for &r in &required {
            if !graph.nodes.contains_key(&r) {
                return Err(SynthError::UnknownNode(r));
            }
        }
        let mut required = required;
        required.remove(&source);
        let big_m = F::from_usize(graph.nodes.len() - 1).unwrap();
        Ok(SynthesisProblem {
            graph,
            source,
            required,
            alpha,
            big_m,
        })
    }

    /// Overrides the flow capacity constant. Values below `|nodes| - 1`
    /// could forbid connected solutions, so they are rejected.
    pub fn with_big_m(mut self, big_m: F) -> Result<Self, SynthError> {
        let need = F::from_usize(self.graph.nodes.len() - 1).unwrap();
        if big_m < need {
            return Err(SynthError::BigMTooSmall {
                got: big_m.as_f64(),
                need: need.as_f64(),
            });
        }
        self.big_m = big_m;
        Ok(self)
    }

    /// Source plus required nodes.
    pub fn terminals(&self) -> BTreeSet<NodeId> {
        let mut t = self.required.clone();
        t.insert(self.source);
        t
    }

    /// Objective coefficient for one candidate edge.
    pub fn edge_cost(&self, edge: EdgeId) -> F {
        let e = &self.graph.edges[edge];
        let w = self.graph.weights.expect("validated at construction");
        let c_geo = w.lambda_c * e.c_cls + w.lambda_b * e.c_bend;
        self.alpha.alpha_geo * c_geo + self.alpha.alpha_top + self.alpha.alpha_elec * e.d
    }

    pub(crate) fn edge_costs(&self) -> Vec<F> {
        (0..self.graph.edges.len()).map(|e| self.edge_cost(e)).collect()
    }
}

/// Directed flow on a selected edge, oriented away from the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEntry<F> {
    pub from: NodeId,
    pub to: NodeId,
    pub f: F,
}

/// A synthesis result: retained nodes `y`, selected edges `z` (by candidate
/// edge index), connectivity flows `f`, and solve metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSolution<F> {
    pub y: BTreeSet<NodeId>,
    pub z: BTreeSet<EdgeId>,
    pub f: Vec<FlowEntry<F>>,
    pub objective: F,
    pub proven_optimal: bool,
    /// Upper bound on the relative optimality gap, zero when proven.
    pub gap: F,
}

/// Builds a full solution (flows included) from a set of tree edges. The
/// edges must form a tree rooted at the source once its endpoints are
/// collected; this is the canonical way solvers materialise their answer.
pub(crate) fn build_solution<F: Scalar>(
    problem: &SynthesisProblem<F>,
    tree_edges: &BTreeSet<EdgeId>,
    proven_optimal: bool,
    gap: F,
) -> SynthesisSolution<F> {
    let mut y: BTreeSet<NodeId> = BTreeSet::new();
    y.insert(problem.source);
    for &e in tree_edges {
        y.insert(problem.graph.edges[e].u);
        y.insert(problem.graph.edges[e].v);
    }
    // Orient flows by BFS from the source, then accumulate subtree node
    // counts: each retained node sinks one unit.
    let mut adj: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>> = BTreeMap::new();
    for &e in tree_edges {
        let ed = &problem.graph.edges[e];
        adj.entry(ed.u).or_default().push((ed.v, e));
        adj.entry(ed.v).or_default().push((ed.u, e));
    }
    for nbrs in adj.values_mut() {
        nbrs.sort();
    }
    let mut parent: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut order: Vec<NodeId> = vec![problem.source];
    let mut seen: BTreeSet<NodeId> = [problem.source].into_iter().collect();
    let mut head = 0;
    while head < order.len() {
        let n = order[head];
        head += 1;
        for &(m, _) in adj.get(&n).into_iter().flatten() {
            if seen.insert(m) {
                parent.insert(m, n);
                order.push(m);
            }
        }
    }
    debug_assert_eq!(seen.len(), y.len(), "tree edges must span a single tree");
    let mut subtree: BTreeMap<NodeId, usize> = y.iter().map(|&n| (n, 1)).collect();
    for &n in order.iter().rev() {
        if let Some(&p) = parent.get(&n) {
            *subtree.get_mut(&p).unwrap() += subtree[&n];
        }
    }
    let mut f: Vec<FlowEntry<F>> = parent
        .iter()
        .map(|(&child, &par)| FlowEntry {
            from: par,
            to: child,
            f: F::from_usize(subtree[&child]).unwrap(),
        })
        .collect();
    f.sort_by_key(|e| (e.from, e.to));
    let mut objective = F::zero();
    for &e in tree_edges {
        objective = objective + problem.edge_cost(e);
    }
    SynthesisSolution {
        y,
        z: tree_edges.clone(),
        f,
        objective,
        proven_optimal,
        gap,
    }
}

/// One failed constraint, with the identities involved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    UnknownEdge { edge: EdgeId },
    UnknownNode { node: NodeId },
    Coupling { edge: EdgeId, missing: NodeId },
    RequiredMissing { node: NodeId },
    Cardinality { edges: usize, nodes: usize },
    FlowBalance { node: NodeId, net_inflow: f64, expected: f64 },
    SourceBalance { outflow: f64, expected: f64 },
    FlowOnUnselectedEdge { from: NodeId, to: NodeId },
    CapacityExceeded { from: NodeId, to: NodeId, f: f64, big_m: f64 },
    NegativeFlow { from: NodeId, to: NodeId, f: f64 },
    ObjectiveMismatch { stated: f64, recomputed: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownEdge { edge } => write!(out, "edge index {edge} not in graph"),
            Violation::UnknownNode { node } => write!(out, "node {node} not in graph"),
            Violation::Coupling { edge, missing } => {
                write!(out, "edge {edge} selected but endpoint {missing} is not")
            }
            Violation::RequiredMissing { node } => {
                write!(out, "required node {node} not retained")
            }
            Violation::Cardinality { edges, nodes } => {
                write!(out, "{edges} edges selected for {nodes} nodes; a tree needs nodes-1")
            }
            Violation::FlowBalance {
                node,
                net_inflow,
                expected,
            } => write!(
                out,
                "flow balance at {node}: net inflow {net_inflow}, expected {expected}"
            ),
            Violation::SourceBalance { outflow, expected } => {
                write!(out, "source net outflow {outflow}, expected {expected}")
            }
            Violation::FlowOnUnselectedEdge { from, to } => {
                write!(out, "flow on unselected edge {from}-{to}")
            }
            Violation::CapacityExceeded { from, to, f, big_m } => {
                write!(out, "flow {f} on {from}-{to} exceeds capacity {big_m}")
            }
            Violation::NegativeFlow { from, to, f } => {
                write!(out, "negative flow {f} on {from}-{to}")
            }
            Violation::ObjectiveMismatch { stated, recomputed } => {
                write!(out, "stated objective {stated} differs from recomputed {recomputed}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(out, "all constraints satisfied");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(out)?;
            }
            write!(out, "{v}")?;
        }
        Ok(())
    }
}

/// Checks a solution against every constraint of the instance, independently
/// of how it was produced.
pub fn verify_solution<F: Scalar>(
    problem: &SynthesisProblem<F>,
    solution: &SynthesisSolution<F>,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    let n_edges = problem.graph.edges.len();
    let tol = 1e-9;

    for &e in &solution.z {
        if e >= n_edges {
            report.violations.push(Violation::UnknownEdge { edge: e });
        }
    }
    for &n in &solution.y {
        if !problem.graph.nodes.contains_key(&n) {
            report.violations.push(Violation::UnknownNode { node: n });
        }
    }
    if !report.ok() {
        return report;
    }

    // Coupling: a selected edge retains both endpoints.
    for &e in &solution.z {
        let ed = &problem.graph.edges[e];
        for end in [ed.u, ed.v] {
            if !solution.y.contains(&end) {
                report.violations.push(Violation::Coupling { edge: e, missing: end });
            }
        }
    }
    // Source and required nodes retained.
    for &n in problem.terminals().iter() {
        if !solution.y.contains(&n) {
            report.violations.push(Violation::RequiredMissing { node: n });
        }
    }
    // Tree cardinality.
    if solution.z.len() + 1 != solution.y.len() {
        report.violations.push(Violation::Cardinality {
            edges: solution.z.len(),
            nodes: solution.y.len(),
        });
    }

    // Flow constraints.
    let big_m = problem.big_m.as_f64();
    let mut net_inflow: BTreeMap<NodeId, f64> = BTreeMap::new();
    let selected_pairs: BTreeSet<(NodeId, NodeId)> = solution
        .z
        .iter()
        .map(|&e| {
            let ed = &problem.graph.edges[e];
            (ed.u.min(ed.v), ed.u.max(ed.v))
        })
        .collect();
    for entry in &solution.f {
        let fv = entry.f.as_f64();
        if fv < 0.0 {
            report.violations.push(Violation::NegativeFlow {
                from: entry.from,
                to: entry.to,
                f: fv,
            });
        }
        let pair = (entry.from.min(entry.to), entry.from.max(entry.to));
        if fv != 0.0 && !selected_pairs.contains(&pair) {
            report.violations.push(Violation::FlowOnUnselectedEdge {
                from: entry.from,
                to: entry.to,
            });
        }
        if fv > big_m + tol {
            report.violations.push(Violation::CapacityExceeded {
                from: entry.from,
                to: entry.to,
                f: fv,
                big_m,
            });
        }
        *net_inflow.entry(entry.to).or_insert(0.0) += fv;
        *net_inflow.entry(entry.from).or_insert(0.0) -= fv;
    }
    for &n in &solution.y {
        let net = net_inflow.get(&n).copied().unwrap_or(0.0);
        if n == problem.source {
            let expected = (solution.y.len() - 1) as f64;
            if (-net - expected).abs() > tol {
                report.violations.push(Violation::SourceBalance {
                    outflow: -net,
                    expected,
                });
            }
        } else if (net - 1.0).abs() > tol {
            report.violations.push(Violation::FlowBalance {
                node: n,
                net_inflow: net,
                expected: 1.0,
            });
        }
    }

    // Objective recomputation.
    let mut recomputed = F::zero();
    for &e in &solution.z {
        recomputed = recomputed + problem.edge_cost(e);
    }
    let stated = solution.objective.as_f64();
    let rec = recomputed.as_f64();
    if (stated - rec).abs() > 1e-9 * rec.abs().max(1.0) {
        report.violations.push(Violation::ObjectiveMismatch {
            stated,
            recomputed: rec,
        });
    }
    report
}

/// A feeder edge oriented from the parent side towards the leaf side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeederEdge<F> {
    pub u: NodeId,
    pub v: NodeId,
    pub length_m: F,
    pub class: RoadClass,
    pub geometry: Vec<GeoPoint<F>>,
}

/// A radial feeder: the verified synthesis result as a rooted tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeederGraph<F> {
    pub nodes: BTreeMap<NodeId, GeoPoint<F>>,
    pub edges: Vec<FeederEdge<F>>,
    pub root: NodeId,
    pub parent: BTreeMap<NodeId, Option<NodeId>>,
    pub depth: BTreeMap<NodeId, u32>,
}

impl<F: Scalar> FeederGraph<F> {
    /// Tree degree per node.
    pub fn degrees(&self) -> BTreeMap<NodeId, usize> {
        let mut deg: BTreeMap<NodeId, usize> = self.nodes.keys().map(|&n| (n, 0)).collect();
        for e in &self.edges {
            *deg.get_mut(&e.u).unwrap() += 1;
            *deg.get_mut(&e.v).unwrap() += 1;
        }
        deg
    }

    /// Children of each node, ascending by id.
    pub fn children(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut ch: BTreeMap<NodeId, Vec<NodeId>> = self.nodes.keys().map(|&n| (n, vec![])).collect();
        for (&n, &p) in &self.parent {
            if let Some(p) = p {
                ch.get_mut(&p).unwrap().push(n);
            }
        }
        ch
    }
}

/// Converts a verified solution into a rooted feeder tree. Fails with the
/// verification report if any constraint is violated.
pub fn to_feeder_graph<F: Scalar>(
    problem: &SynthesisProblem<F>,
    solution: &SynthesisSolution<F>,
) -> Result<FeederGraph<F>, SynthError> {
    let report = verify_solution(problem, solution);
    if !report.ok() {
        return Err(SynthError::Rejected(report));
    }
    let mut adj: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>> = BTreeMap::new();
    for &e in &solution.z {
        let ed = &problem.graph.edges[e];
        adj.entry(ed.u).or_default().push((ed.v, e));
        adj.entry(ed.v).or_default().push((ed.u, e));
    }
    for nbrs in adj.values_mut() {
        nbrs.sort();
    }
    let mut parent: BTreeMap<NodeId, Option<NodeId>> = BTreeMap::new();
    let mut depth: BTreeMap<NodeId, u32> = BTreeMap::new();
    let mut edges: Vec<FeederEdge<F>> = Vec::new();
    parent.insert(problem.source, None);
    depth.insert(problem.source, 0);
    let mut queue = std::collections::VecDeque::from([problem.source]);
    while let Some(n) = queue.pop_front() {
        for &(m, e) in adj.get(&n).into_iter().flatten() {
            if parent.contains_key(&m) {
                continue;
            }
            parent.insert(m, Some(n));
            depth.insert(m, depth[&n] + 1);
            let ed = &problem.graph.edges[e];
            let mut geometry = ed.geometry.clone();
            if ed.u != n {
                geometry.reverse();
            }
            edges.push(FeederEdge {
                u: n,
                v: m,
                length_m: ed.d,
                class: ed.class.clone(),
                geometry,
            });
            queue.push_back(m);
        }
    }
    if parent.len() != solution.y.len() {
        // Unreachable given a passing verification, kept as a guard.
        return Err(SynthError::Rejected(report));
    }
    edges.sort_by_key(|e| (e.u, e.v));
    let nodes = solution
        .y
        .iter()
        .map(|&n| (n, problem.graph.nodes[&n]))
        .collect();
    Ok(FeederGraph {
        nodes,
        edges,
        root: problem.source,
        parent,
        depth,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("candidate graph has no nodes")]
    Empty,
    #[error("candidate graph has not been scored; run score_edges first")]
    Unscored,
    #[error("node {0} is not in the candidate graph")]
    UnknownNode(NodeId),
    #[error("invalid alpha weights: {0}")]
    InvalidAlpha(String),
    #[error("big_m {got} is below the connectivity bound {need}")]
    BigMTooSmall { got: f64, need: f64 },
    #[error("the source cannot reach every required node in the candidate graph")]
    Disconnected,
    #[error("{0} terminals exceed the oracle limit of {1}")]
    TooManyTerminals(usize, usize),
    #[error("solution rejected by verification: {0}")]
    Rejected(VerificationReport),
}


#[cfg(test)]
mod tests {
    use super::testgraph::*;
    use super::*;

    #[test]
    fn edge_cost_combines_terms() {
        // c_geo = 3 via c_cls, d is forced, alpha = (1, 2, 0.01).
        let mut graph = graph_from_costs(&[1, 2], &[(1, 2, 3.0)]);
        graph.edges[0].d = 200.0;
        let problem = SynthesisProblem::new(
            graph,
            NodeId(1),
            BTreeSet::new(),
            AlphaWeights {
                alpha_geo: 1.0,
                alpha_top: 2.0,
                alpha_elec: 0.01,
            },
        )
        .unwrap();
        assert_eq!(problem.edge_cost(0), 3.0 + 2.0 + 2.0);
    }

    #[test]
    fn build_solution_flows_are_subtree_counts() {
        // Path 1 - 2 - 3 rooted at 1.
        let problem = problem_from_costs(&[1, 2, 3], &[(1, 2, 1.0), (2, 3, 1.0)], 1, &[3]);
        let sol = build_solution(&problem, &[0usize, 1].into_iter().collect(), true, 0.0);
        assert_eq!(sol.objective, 2.0);
        assert_eq!(sol.y.len(), 3);
        assert_eq!(
            sol.f,
            vec![
                FlowEntry { from: NodeId(1), to: NodeId(2), f: 2.0 },
                FlowEntry { from: NodeId(2), to: NodeId(3), f: 1.0 },
            ]
        );
        assert!(verify_solution(&problem, &sol).ok());
    }

    #[test]
    fn verify_catches_coupling_violation() {
        let problem = problem_from_costs(&[1, 2, 3], &[(1, 2, 1.0), (2, 3, 1.0)], 1, &[3]);
        let mut sol = build_solution(&problem, &[0usize, 1].into_iter().collect(), true, 0.0);
        sol.y.remove(&NodeId(2)); // z still selects edges at node 2
        let report = verify_solution(&problem, &sol);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Coupling { .. })));
    }

    #[test]
    fn verify_catches_broken_cardinality_and_flow() {
        let problem =
            problem_from_costs(&[1, 2, 3], &[(1, 2, 1.0), (2, 3, 1.0), (1, 3, 5.0)], 1, &[3]);
        let mut sol = build_solution(&problem, &[0usize, 1].into_iter().collect(), true, 0.0);
        sol.z.insert(2); // close the cycle
        let report = verify_solution(&problem, &sol);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Cardinality { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ObjectiveMismatch { .. })));
    }

    #[test]
    fn verify_catches_missing_required() {
        let problem = problem_from_costs(&[1, 2, 3], &[(1, 2, 1.0), (2, 3, 1.0)], 1, &[3]);
        let sol = build_solution(&problem, &[0usize].into_iter().collect(), true, 0.0);
        let report = verify_solution(&problem, &sol);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::RequiredMissing { node } if *node == NodeId(3))));
    }

    #[test]
    fn feeder_graph_orients_edges_from_the_root() {
        let problem = problem_from_costs(
            &[1, 2, 3, 4],
            &[(1, 2, 1.0), (2, 3, 1.0), (2, 4, 1.0)],
            1,
            &[3, 4],
        );
        let sol = build_solution(&problem, &[0usize, 1, 2].into_iter().collect(), true, 0.0);
        let feeder = to_feeder_graph(&problem, &sol).unwrap();
        assert_eq!(feeder.root, NodeId(1));
        assert_eq!(feeder.depth[&NodeId(1)], 0);
        assert_eq!(feeder.depth[&NodeId(4)], 2);
        assert_eq!(feeder.parent[&NodeId(4)], Some(NodeId(2)));
        for e in &feeder.edges {
            assert_eq!(feeder.parent[&e.v], Some(e.u), "edges point away from root");
            assert_eq!(e.geometry[0], feeder.nodes[&e.u]);
        }
    }

    #[test]
    fn small_big_m_is_rejected() {
        let problem = problem_from_costs(&[1, 2, 3], &[(1, 2, 1.0), (2, 3, 1.0)], 1, &[3]);
        assert!(matches!(
            problem.with_big_m(1.0),
            Err(SynthError::BigMTooSmall { .. })
        ));
    }
}
