use super::{GeoError, GeoGraph, NodeId};
use crate::scalar::{cmp_finite, Scalar};
use std::collections::BTreeMap;

/// Removes self-loops, collapses parallel edges onto the shortest
/// representative and keeps the largest connected component (ties broken
/// towards the component holding the smallest node id). Requires projected
/// geometry since lengths are compared in metres.
pub fn clean<F: Scalar>(graph: &GeoGraph<F>) -> Result<GeoGraph<F>, GeoError> {
    if graph.nodes.is_empty() {
        return Err(GeoError::EmptyGraph("clean() given a graph without nodes"));
    }

    // Keep the shortest edge per unordered endpoint pair, first-in wins ties.
    let mut best: BTreeMap<(NodeId, NodeId), (usize, F)> = BTreeMap::new();
    for (idx, e) in graph.edges.iter().enumerate() {
        if e.u == e.v {
            continue;
        }
        let key = (e.u.min(e.v), e.u.max(e.v));
        let len = e.arc_length()?;
        match best.get(&key) {
            Some(&(_, cur)) if cmp_finite(&cur, &len) != std::cmp::Ordering::Greater => {}
            _ => {
                best.insert(key, (idx, len));
            }
        }
    }

    // Union-find over nodes to locate the largest component.
    let ids: Vec<NodeId> = graph.nodes.keys().copied().collect();
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for &(idx, _) in best.values() {
        let e = &graph.edges[idx];
        let (a, b) = (find(&mut parent, index[&e.u]), find(&mut parent, index[&e.v]));
        if a != b {
            parent[a] = b;
        }
    }
    let mut comp_size: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..ids.len() {
        let root = find(&mut parent, i);
        *comp_size.entry(root).or_insert(0) += 1;
    }
    // Largest component; ties resolve to the one containing the smallest
    // node id, which is the first index with maximal size.
    let mut keep_root = 0;
    let mut keep_size = 0;
    for i in 0..ids.len() {
        let root = find(&mut parent, i);
        let size = comp_size[&root];
        if size > keep_size {
            keep_root = root;
            keep_size = size;
        }
    }

    let mut out = GeoGraph::default();
    for (i, &id) in ids.iter().enumerate() {
        if find(&mut parent, i) == keep_root {
            out.nodes.insert(id, graph.nodes[&id]);
        }
    }
    for &(idx, _) in best.values() {
        let e = &graph.edges[idx];
        if out.nodes.contains_key(&e.u) {
            out.edges.push(e.clone());
        }
    }
    Ok(out)
}
