//! Independent exact oracle: the classic subset dynamic program over
//! terminal sets. Exponential in the number of terminals, so capped, but
//! it shares no machinery with the branch-and-bound solver and serves as
//! its cross-check.

use super::heuristic::prune_leaves;
use super::sub::NodeIndex;
use super::{build_solution, EdgeId, SynthError, SynthesisProblem, SynthesisSolution};
use crate::scalar::{MinKey, Scalar};
use std::collections::{BTreeSet, BinaryHeap};

/// Above this many terminals the subset DP table becomes unreasonable.
pub const MAX_ORACLE_TERMINALS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Step {
    Unset,
    /// Base case: a single terminal by itself.
    Leaf,
    /// Reached by walking one edge from `prev`.
    Walk { prev: u32, edge: u32 },
    /// Union of two subproblems at the same node, `sub` and its complement.
    Merge { sub: u32 },
}

/// Minimum-cost tree spanning source and required nodes, by dynamic
/// programming over terminal subsets. `dp[mask][v]` is the cheapest tree
/// connecting terminal set `mask` and node `v`; subsets merge at shared
/// nodes and spread along shortest paths.
pub fn steiner_oracle<F: Scalar>(
    problem: &SynthesisProblem<F>,
) -> Result<SynthesisSolution<F>, SynthError> {
    let terminals: Vec<_> = problem.terminals().into_iter().collect();
    let k = terminals.len();
    if k > MAX_ORACLE_TERMINALS {
        return Err(SynthError::TooManyTerminals(k, MAX_ORACLE_TERMINALS));
    }
    if k == 1 {
        return Ok(build_solution(problem, &BTreeSet::new(), true, F::zero()));
    }
    let nodes = NodeIndex::new(problem);
    let n = nodes.ids.len();
    let costs = problem.edge_costs();
    let mut adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); n];
    for (e, ed) in problem.graph.edges.iter().enumerate() {
        let u = nodes.index[&ed.u];
        let v = nodes.index[&ed.v];
        adj[u].push((v, e));
        adj[v].push((u, e));
    }
    let term_at: Vec<usize> = terminals.iter().map(|t| nodes.index[t]).collect();
    let full: usize = (1 << k) - 1;
    let mut dp: Vec<Vec<F>> = vec![vec![F::infinity(); n]; 1 << k];
    let mut step: Vec<Vec<Step>> = vec![vec![Step::Unset; n]; 1 << k];
    for (i, &v) in term_at.iter().enumerate() {
        dp[1 << i][v] = F::zero();
        step[1 << i][v] = Step::Leaf;
    }
    for mask in 1..=full {
        // Merge two complementary subsets at a common node. Fixing the
        // lowest terminal of `mask` inside `sub` visits each split once.
        let low = mask & mask.wrapping_neg();
        let mut sub = (mask - 1) & mask;
        while sub > 0 {
            if sub & low != 0 {
                let rest = mask ^ sub;
                for v in 0..n {
                    let cand = dp[sub][v] + dp[rest][v];
                    if cand < dp[mask][v] {
                        dp[mask][v] = cand;
                        step[mask][v] = Step::Merge { sub: sub as u32 };
                    }
                }
            }
            sub = (sub - 1) & mask;
        }
        // Spread along shortest paths: Dijkstra seeded with dp[mask].
        let mut heap: BinaryHeap<MinKey<F>> = BinaryHeap::new();
        for v in 0..n {
            if dp[mask][v] < F::infinity() {
                heap.push(MinKey(dp[mask][v], v));
            }
        }
        while let Some(MinKey(d, v)) = heap.pop() {
            if d > dp[mask][v] {
                continue;
            }
            for &(u, e) in &adj[v] {
                let nd = d + costs[e];
                if nd < dp[mask][u] {
                    dp[mask][u] = nd;
                    step[mask][u] = Step::Walk {
                        prev: v as u32,
                        edge: e as u32,
                    };
                    heap.push(MinKey(nd, u));
                }
            }
        }
    }
    let root = term_at[0];
    if !dp[full][root].is_finite() {
        return Err(SynthError::Disconnected);
    }
    // Unwind the table into an edge set.
    let mut edges: BTreeSet<EdgeId> = BTreeSet::new();
    let mut stack: Vec<(usize, usize)> = vec![(full, root)];
    while let Some((mask, v)) = stack.pop() {
        match step[mask][v] {
            Step::Leaf => {}
            Step::Walk { prev, edge } => {
                edges.insert(edge as EdgeId);
                stack.push((mask, prev as usize));
            }
            Step::Merge { sub } => {
                stack.push((sub as usize, v));
                stack.push((mask ^ sub as usize, v));
            }
            Step::Unset => unreachable!("finite dp entry without a step"),
        }
    }
    // Zero-cost edges can leave redundant cycles or dangles in the unwound
    // set; a spanning-tree sweep plus leaf pruning removes them without
    // changing the cost.
    let mut tree = spanning_subtree(problem, &edges);
    prune_leaves(problem, &mut tree);
    Ok(build_solution(problem, &tree, true, F::zero()))
}

/// Breadth-first spanning tree of the edge set, from the source, neighbours
/// in ascending order.
fn spanning_subtree<F: Scalar>(
    problem: &SynthesisProblem<F>,
    edges: &BTreeSet<EdgeId>,
) -> BTreeSet<EdgeId> {
    use crate::geograph::NodeId;
    use std::collections::BTreeMap;
    let mut adj: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>> = BTreeMap::new();
    for &e in edges {
        let ed = &problem.graph.edges[e];
        adj.entry(ed.u).or_default().push((ed.v, e));
        adj.entry(ed.v).or_default().push((ed.u, e));
    }
    for nbrs in adj.values_mut() {
        nbrs.sort();
    }
    let mut seen: BTreeSet<NodeId> = [problem.source].into_iter().collect();
    let mut queue = std::collections::VecDeque::from([problem.source]);
    let mut tree = BTreeSet::new();
    while let Some(nd) = queue.pop_front() {
        for &(m, e) in adj.get(&nd).into_iter().flatten() {
            if seen.insert(m) {
                tree.insert(e);
                queue.push_back(m);
            }
        }
    }
    tree
}

#[cfg(test)]
mod tests {
    use super::super::testgraph::problem_from_costs;
    use super::super::{solve_exact, verify_solution};
    use super::*;

    #[test]
    fn oracle_matches_hand_computed_optimum() {
        let problem = problem_from_costs(
            &[1, 2, 3],
            &[(1, 2, 1.0), (2, 3, 2.0), (1, 3, 4.0)],
            1,
            &[2, 3],
        );
        let sol = steiner_oracle(&problem).unwrap();
        assert_eq!(sol.objective, 3.0);
        assert!(sol.proven_optimal);
        assert!(verify_solution(&problem, &sol).ok());
    }

    #[test]
    fn oracle_uses_steiner_nodes() {
        let problem = problem_from_costs(
            &[1, 2, 3, 5],
            &[
                (1, 5, 1.0),
                (2, 5, 1.0),
                (3, 5, 1.0),
                (1, 2, 3.0),
                (1, 3, 3.0),
            ],
            1,
            &[2, 3],
        );
        let sol = steiner_oracle(&problem).unwrap();
        assert_eq!(sol.objective, 3.0);
    }

    #[test]
    fn oracle_agrees_with_the_solver_on_a_mesh() {
        let problem = problem_from_costs(
            &[1, 2, 3, 4, 5, 6],
            &[
                (1, 2, 2.0),
                (1, 3, 3.0),
                (2, 3, 2.0),
                (2, 4, 4.0),
                (3, 4, 2.0),
                (3, 5, 5.0),
                (4, 5, 2.0),
                (4, 6, 3.0),
                (5, 6, 1.0),
            ],
            1,
            &[4, 5, 6],
        );
        let a = steiner_oracle(&problem).unwrap();
        let b = solve_exact(&problem).unwrap();
        assert_eq!(a.objective, b.objective);
        assert!(verify_solution(&problem, &a).ok());
    }

    #[test]
    fn oracle_rejects_too_many_terminals() {
        let nodes: Vec<i64> = (1..=14).collect();
        let edges: Vec<(i64, i64, f64)> = (1..14).map(|i| (i, i + 1, 1.0)).collect();
        let required: Vec<i64> = (2..=14).collect();
        let problem = problem_from_costs(&nodes, &edges, 1, &required);
        assert!(matches!(
            steiner_oracle(&problem),
            Err(SynthError::TooManyTerminals(14, MAX_ORACLE_TERMINALS))
        ));
    }

    #[test]
    fn single_terminal_is_trivial() {
        let problem = problem_from_costs(&[1, 2], &[(1, 2, 1.0)], 1, &[]);
        let sol = steiner_oracle(&problem).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.z.is_empty());
    }
}
