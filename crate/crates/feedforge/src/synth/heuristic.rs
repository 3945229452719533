//! Path-joining heuristic: shortest-path tree growth, pruning of useless
//! leaves, then a 2-opt edge exchange that swaps one tree edge for a
//! cheaper reconnecting edge until no improvement remains. The growth step
//! attaches terminals along shortest paths, so its cost is at most twice
//! the optimum; the later passes only ever reduce it.

use super::dual_ascent::dual_ascent;
use super::sph::sph;
use super::sub::{NodeIndex, Sub};
use super::{build_solution, EdgeId, SynthError, SynthesisProblem, SynthesisSolution};
use crate::geograph::NodeId;
use crate::scalar::{cmp_finite, Scalar};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

pub fn solve_heuristic<F: Scalar>(
    problem: &SynthesisProblem<F>,
) -> Result<SynthesisSolution<F>, SynthError> {
    let costs = problem.edge_costs();
    let nodes = NodeIndex::new(problem);
    let free = vec![None; problem.graph.edges.len()];
    let sub = Sub::build(problem, &nodes, &free);

    let da = dual_ascent(&sub, &costs);
    if !da.feasible {
        return Err(SynthError::Disconnected);
    }
    let Some(grown) = sph(&sub, &costs) else {
        return Err(SynthError::Disconnected);
    };

    let mut tree = grown.edges;
    prune_leaves(problem, &mut tree);
    two_opt(problem, &costs, &mut tree);

    let mut ub = F::zero();
    for &e in &tree {
        ub = ub + costs[e];
    }
    let gap = if ub > F::zero() {
        let g = (ub - da.lower_bound) / ub;
        if g > F::zero() {
            g
        } else {
            F::zero()
        }
    } else {
        F::zero()
    };
    Ok(build_solution(problem, &tree, false, gap))
}

/// Removes non-terminal leaves until every leaf is a terminal. Such leaves
/// carry no load and serve no path, so dropping them only reduces cost.
pub(crate) fn prune_leaves<F: Scalar>(problem: &SynthesisProblem<F>, tree: &mut BTreeSet<EdgeId>) {
    let terminals = problem.terminals();
    loop {
        let mut degree: BTreeMap<NodeId, Vec<EdgeId>> = BTreeMap::new();
        for &e in tree.iter() {
            let ed = &problem.graph.edges[e];
            degree.entry(ed.u).or_default().push(e);
            degree.entry(ed.v).or_default().push(e);
        }
        let removable: Vec<EdgeId> = degree
            .iter()
            .filter(|(n, inc)| inc.len() == 1 && !terminals.contains(n))
            .map(|(_, inc)| inc[0])
            .collect();
        if removable.is_empty() {
            return;
        }
        for e in removable {
            tree.remove(&e);
        }
    }
}

/// For each tree edge, looks for a cheaper candidate edge that reconnects
/// the two components left by its removal. Deterministic: edges are scanned
/// ascending, replacements tie-break on id, and the scan restarts after
/// every improvement.
fn two_opt<F: Scalar>(problem: &SynthesisProblem<F>, costs: &[F], tree: &mut BTreeSet<EdgeId>) {
    'scan: loop {
        let snapshot: Vec<EdgeId> = tree.iter().copied().collect();
        for &out in &snapshot {
            // Side A: nodes reachable from the source without `out`.
            let mut side_a: BTreeSet<NodeId> = BTreeSet::new();
            side_a.insert(problem.source);
            let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
            for &e in tree.iter() {
                if e == out {
                    continue;
                }
                let ed = &problem.graph.edges[e];
                adj.entry(ed.u).or_default().push(ed.v);
                adj.entry(ed.v).or_default().push(ed.u);
            }
            let mut stack = vec![problem.source];
            while let Some(n) = stack.pop() {
                for &m in adj.get(&n).into_iter().flatten() {
                    if side_a.insert(m) {
                        stack.push(m);
                    }
                }
            }
            let in_tree: BTreeSet<NodeId> = tree
                .iter()
                .flat_map(|&e| {
                    let ed = &problem.graph.edges[e];
                    [ed.u, ed.v]
                })
                .collect();
            // Cheapest candidate edge crossing the cut, `out` included.
            let mut best: (F, EdgeId) = (costs[out], out);
            for (e, ed) in problem.graph.edges.iter().enumerate() {
                if !in_tree.contains(&ed.u) || !in_tree.contains(&ed.v) {
                    continue;
                }
                if side_a.contains(&ed.u) == side_a.contains(&ed.v) {
                    continue;
                }
                if cmp_finite(&costs[e], &best.0).then(e.cmp(&best.1)) == Ordering::Less {
                    best = (costs[e], e);
                }
            }
            if best.1 != out && best.0 < costs[out] - F::of(1e-12) {
                tree.remove(&out);
                tree.insert(best.1);
                prune_leaves(problem, tree);
                continue 'scan;
            }
        }
        return;
    }
}
