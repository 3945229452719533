//! Shortest-path heuristic on a contracted view: repeatedly wire the
//! terminal nearest to the partial tree into it along a shortest path.
//! Every step is tie-broken on component index, so the result is a pure
//! function of the view.

use super::sub::Sub;
use super::EdgeId;
use crate::scalar::{cmp_finite, MinKey, Scalar};
use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

pub(crate) struct SphResult<F> {
    pub edges: BTreeSet<EdgeId>,
    /// Total cost of `edges` alone, excluding anything already forced.
    pub cost: F,
}

pub(crate) fn sph<F: Scalar>(sub: &Sub, costs: &[F]) -> Option<SphResult<F>> {
    if sub.infeasible {
        return None;
    }
    let mut remaining: BTreeSet<usize> = sub.active_terminals().into_iter().collect();
    let mut adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); sub.n];
    for e in &sub.edges {
        adj[e.u].push((e.v, e.id));
        adj[e.v].push((e.u, e.id));
    }
    let mut in_tree = vec![false; sub.n];
    in_tree[sub.root] = true;
    let mut chosen: BTreeSet<EdgeId> = BTreeSet::new();
    let mut total = F::zero();

    while !remaining.is_empty() {
        // Dijkstra from the whole partial tree.
        let mut dist: Vec<Option<F>> = vec![None; sub.n];
        let mut pred: Vec<Option<(usize, EdgeId)>> = vec![None; sub.n];
        let mut heap: BinaryHeap<MinKey<F>> = BinaryHeap::new();
        for c in 0..sub.n {
            if in_tree[c] {
                dist[c] = Some(F::zero());
                heap.push(MinKey(F::zero(), c));
            }
        }
        while let Some(MinKey(d, c)) = heap.pop() {
            if dist[c].map_or(true, |best| d > best) {
                continue;
            }
            for &(other, id) in &adj[c] {
                let nd = d + costs[id];
                if dist[other].map_or(true, |best| nd < best) {
                    dist[other] = Some(nd);
                    pred[other] = Some((c, id));
                    heap.push(MinKey(nd, other));
                }
            }
        }
        // Nearest remaining terminal, ties on component index.
        let mut pick: Option<(F, usize)> = None;
        for &t in &remaining {
            let Some(d) = dist[t] else { return None };
            pick = Some(match pick {
                Some((bd, bt)) if cmp_finite(&bd, &d).then(bt.cmp(&t)) != Ordering::Greater => {
                    (bd, bt)
                }
                _ => (d, t),
            });
        }
        let (_, t) = pick?;
        // Splice the path into the tree.
        let mut cur = t;
        while !in_tree[cur] {
            in_tree[cur] = true;
            remaining.remove(&cur);
            let (prev, id) = pred[cur].expect("path exists because dist was finite");
            if chosen.insert(id) {
                total = total + costs[id];
            }
            cur = prev;
        }
        remaining.remove(&t);
    }
    Some(SphResult {
        edges: chosen,
        cost: total,
    })
}
