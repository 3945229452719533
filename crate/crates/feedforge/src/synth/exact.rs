//! Exact solver: branch and bound on edge membership. Each node of the
//! search contracts forced-in edges, drops forced-out edges, bounds the
//! remainder from below by dual ascent and from above by the shortest-path
//! heuristic, and branches on the most expensive heuristic edge. A second
//! phase re-runs the search as a sequence of feasibility probes to return
//! the lexicographically smallest edge-id set among all optima.

use super::dual_ascent::dual_ascent;
use super::sph::sph;
use super::sub::{NodeIndex, Sub};
use super::{build_solution, EdgeId, SynthError, SynthesisProblem, SynthesisSolution};
use crate::scalar::Scalar;
use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy)]
pub struct ExactOptions {
    /// Wall-clock budget; on expiry the best incumbent is returned with
    /// `proven_optimal = false` and the root bound gap.
    pub timeout: Duration,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            timeout: Duration::from_secs(120),
        }
    }
}

pub fn solve_exact<F: Scalar>(
    problem: &SynthesisProblem<F>,
) -> Result<SynthesisSolution<F>, SynthError> {
    solve_exact_with(problem, ExactOptions::default())
}

pub fn solve_exact_with<F: Scalar>(
    problem: &SynthesisProblem<F>,
    options: ExactOptions,
) -> Result<SynthesisSolution<F>, SynthError> {
    let deadline = Instant::now() + options.timeout;
    let costs = problem.edge_costs();
    let nodes = NodeIndex::new(problem);
    let m = problem.graph.edges.len();
    let mut state: Vec<Option<bool>> = vec![None; m];

    let root_sub = Sub::build(problem, &nodes, &state);
    if root_sub.active_terminals().is_empty() {
        return Ok(build_solution(problem, &BTreeSet::new(), true, F::zero()));
    }
    let root_da = dual_ascent(&root_sub, &costs);
    if !root_da.feasible {
        return Err(SynthError::Disconnected);
    }
    let root_sph = sph(&root_sub, &costs).ok_or(SynthError::Disconnected)?;

    let mut search = Search {
        problem,
        nodes: &nodes,
        costs: &costs,
        deadline,
        timed_out: false,
        incumbent: root_sph.edges,
        incumbent_cost: root_sph.cost,
        target: None,
        eps_tie: F::zero(),
        found: None,
    };
    search.branch(&mut state, F::zero());

    if search.timed_out {
        let ub = search.incumbent_cost;
        let gap = if ub > F::zero() {
            ((ub - root_da.lower_bound) / ub).max(F::zero())
        } else {
            F::zero()
        };
        return Ok(build_solution(problem, &search.incumbent, false, gap));
    }

    let witness = lex_smallest_optimum(
        problem,
        &nodes,
        &costs,
        search.incumbent_cost,
        search.incumbent,
        deadline,
    );
    Ok(build_solution(problem, &witness, true, F::zero()))
}

/// Greedy per-edge refinement: scanning edge ids in ascending order, keep
/// an edge exactly when some optimum-value solution is consistent with all
/// decisions so far plus that edge. Each query is a bounded feasibility
/// search. The scan stops early once the kept edges already form an
/// optimum, since any extension would be lexicographically larger.
fn lex_smallest_optimum<F: Scalar>(
    problem: &SynthesisProblem<F>,
    nodes: &NodeIndex,
    costs: &[F],
    v_star: F,
    mut witness: BTreeSet<EdgeId>,
    deadline: Instant,
) -> BTreeSet<EdgeId> {
    let m = problem.graph.edges.len();
    let eps_tie = F::of(1e-9) * F::one().max(v_star.abs());
    let mut state: Vec<Option<bool>> = vec![None; m];
    let mut included: BTreeSet<EdgeId> = BTreeSet::new();
    let mut base = F::zero();
    for e in 0..m {
        if Instant::now() >= deadline {
            return witness;
        }
        if is_complete_optimum(problem, costs, &included, v_star, eps_tie) {
            return included;
        }
        if witness.contains(&e) {
            included.insert(e);
            state[e] = Some(true);
            base = base + costs[e];
            continue;
        }
        state[e] = Some(true);
        let mut probe = Search {
            problem,
            nodes,
            costs,
            deadline,
            timed_out: false,
            incumbent: BTreeSet::new(),
            incumbent_cost: F::infinity(),
            target: Some(v_star),
            eps_tie,
            found: None,
        };
        probe.branch(&mut state, base + costs[e]);
        if probe.timed_out {
            state[e] = None;
            return witness;
        }
        match probe.found {
            Some(sol) => {
                witness = sol;
                included.insert(e);
                base = base + costs[e];
            }
            None => {
                state[e] = Some(false);
            }
        }
    }
    witness
}

/// True when `edges` is a tree that spans every terminal and costs no more
/// than the optimum (so exactly the optimum).
fn is_complete_optimum<F: Scalar>(
    problem: &SynthesisProblem<F>,
    costs: &[F],
    edges: &BTreeSet<EdgeId>,
    v_star: F,
    eps_tie: F,
) -> bool {
    let mut cost = F::zero();
    for &e in edges {
        cost = cost + costs[e];
    }
    if cost > v_star + eps_tie {
        return false;
    }
    let mut adj: BTreeMap<crate::geograph::NodeId, Vec<crate::geograph::NodeId>> = BTreeMap::new();
    let mut node_count = 1; // the source
    for &e in edges {
        let ed = &problem.graph.edges[e];
        for n in [ed.u, ed.v] {
            if !adj.contains_key(&n) && n != problem.source {
                node_count += 1;
            }
        }
        adj.entry(ed.u).or_default().push(ed.v);
        adj.entry(ed.v).or_default().push(ed.u);
    }
    // A tree over the touched nodes plus the source has nodes-1 edges.
    if edges.len() + 1 != node_count {
        return false;
    }
    let mut seen: BTreeSet<crate::geograph::NodeId> = BTreeSet::new();
    seen.insert(problem.source);
    let mut stack = vec![problem.source];
    while let Some(n) = stack.pop() {
        for &nb in adj.get(&n).into_iter().flatten() {
            if seen.insert(nb) {
                stack.push(nb);
            }
        }
    }
    if seen.len() != node_count {
        return false;
    }
    problem.terminals().iter().all(|t| seen.contains(t))
}

struct Search<'a, F: Scalar> {
    problem: &'a SynthesisProblem<F>,
    nodes: &'a NodeIndex,
    costs: &'a [F],
    deadline: Instant,
    timed_out: bool,
    incumbent: BTreeSet<EdgeId>,
    incumbent_cost: F,
    /// Phase two: accept any solution within `eps_tie` of this value.
    target: Option<F>,
    eps_tie: F,
    found: Option<BTreeSet<EdgeId>>,
}

impl<F: Scalar> Search<'_, F> {
    fn pruned(&self, lb: F) -> bool {
        match self.target {
            Some(t) => lb > t + self.eps_tie,
            None => {
                let slack = F::of(1e-12) * F::one().max(self.incumbent_cost.abs());
                lb >= self.incumbent_cost - slack
            }
        }
    }

    fn forced_in(&self, state: &[Option<bool>]) -> BTreeSet<EdgeId> {
        state
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Some(true))
            .map(|(e, _)| e)
            .collect()
    }

    fn branch(&mut self, state: &mut Vec<Option<bool>>, base: F) {
        if self.found.is_some() || self.timed_out {
            return;
        }
        if Instant::now() >= self.deadline {
            self.timed_out = true;
            return;
        }
        let sub = Sub::build(self.problem, self.nodes, state);
        if sub.infeasible {
            return;
        }
        let da = dual_ascent(&sub, self.costs);
        if !da.feasible {
            return;
        }
        let lb = base + da.lower_bound;
        if self.pruned(lb) {
            return;
        }
        let Some(s) = sph(&sub, self.costs) else {
            return;
        };
        let ub = base + s.cost;
        match self.target {
            None => {
                if ub < self.incumbent_cost {
                    let mut edges = self.forced_in(state);
                    edges.extend(&s.edges);
                    self.incumbent = edges;
                    self.incumbent_cost = ub;
                }
            }
            Some(t) => {
                if ub <= t + self.eps_tie {
                    let mut edges = self.forced_in(state);
                    edges.extend(&s.edges);
                    self.found = Some(edges);
                    return;
                }
            }
        }
        // Heuristic matched the bound: this node is solved.
        let slack = F::of(1e-12) * F::one().max(ub.abs());
        if ub <= lb + slack {
            return;
        }
        // Branch on the most expensive heuristic edge, smallest id on ties.
        let mut b = *s.edges.iter().next().expect("gap implies a nonempty tree");
        for &e in &s.edges {
            if self.costs[e] > self.costs[b] {
                b = e;
            }
        }
        state[b] = Some(true);
        self.branch(state, base + self.costs[b]);
        state[b] = None;
        if self.timed_out || self.found.is_some() {
            return;
        }
        state[b] = Some(false);
        self.branch(state, base);
        state[b] = None;
    }
}
