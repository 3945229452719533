use super::{polyline_length, CandidateEdge, CandidateGraph, GeoError, GeoGraph, GeoPoint, NodeId, RoadClass};
use crate::scalar::{cmp_finite, Scalar};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone)]
struct WorkEdge<F> {
    u: NodeId,
    v: NodeId,
    class: RoadClass,
    geometry: Vec<GeoPoint<F>>,
    len: F,
    /// One of the two arcs of a split cycle; exempt from the parallel
    /// keep-cheaper rule because dropping it would sever the ring.
    cycle_arc: bool,
}

/// Contracts interior degree-2 nodes into edge geometry until only
/// intersections, dead ends and protected nodes remain. Chains that end up
/// parallel between the same pair of nodes keep only the shorter route; a
/// cycle without any anchor is kept as a two-node, two-edge ring split at
/// its two farthest-apart nodes. Runs to a fixed point, so the result has no
/// removable degree-2 node left.
pub fn simplify<F: Scalar>(
    graph: &GeoGraph<F>,
    protected: &BTreeSet<NodeId>,
) -> Result<CandidateGraph<F>, GeoError> {
    if graph.nodes.is_empty() {
        return Err(GeoError::EmptyGraph("simplify() given a graph without nodes"));
    }
    let mut edges: Vec<WorkEdge<F>> = graph
        .edges
        .iter()
        .map(|e| {
            Ok(WorkEdge {
                u: e.u,
                v: e.v,
                class: e.class.clone(),
                geometry: e.geometry.clone(),
                len: e.arc_length()?,
                cycle_arc: false,
            })
        })
        .collect::<Result<_, GeoError>>()?;

    loop {
        // Live node set and adjacency for this round.
        let mut incident: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            incident.entry(e.u).or_default().push(i);
            incident.entry(e.v).or_default().push(i);
        }
        if incident.is_empty() {
            break; // isolated single node graph
        }
        let anchors: BTreeSet<NodeId> = incident
            .iter()
            .filter(|(n, inc)| inc.len() != 2 || protected.contains(n))
            .map(|(&n, _)| n)
            .collect();

        if anchors.is_empty() {
            // The graph is a single anchor-free cycle.
            if incident.len() == 2 && edges.len() == 2 {
                break; // already a split ring
            }
            edges = split_cycle(&edges, &incident)?;
            continue;
        }

        let mut next: Vec<WorkEdge<F>> = Vec::new();
        let mut visited = vec![false; edges.len()];
        let mut changed = false;

        for &a in &anchors {
            for &start in &incident[&a] {
                if visited[start] {
                    continue;
                }
                // Walk from `a` through degree-2 non-anchor nodes.
                let mut chain = vec![start];
                visited[start] = true;
                let mut cur = other_end(&edges[start], a);
                while !anchors.contains(&cur) {
                    let inc = &incident[&cur];
                    // Degree-2 node: continue along the edge we did not
                    // arrive by.
                    let came_by = *chain.last().unwrap();
                    let next_edge = if inc[0] == came_by { inc[1] } else { inc[0] };
                    visited[next_edge] = true;
                    chain.push(next_edge);
                    cur = other_end(&edges[next_edge], cur);
                }

                if cur == a && chain.len() >= 2 {
                    // A loop attached at a single anchor.
                    if chain.len() == 2 {
                        // Already a split ring hanging off `a`; stable.
                        next.push(edges[chain[0]].clone());
                        next.push(edges[chain[1]].clone());
                    } else {
                        let (first, second) = split_loop(&edges, &chain, a)?;
                        next.push(first);
                        next.push(second);
                        changed = true;
                    }
                } else if chain.len() == 1 {
                    next.push(edges[start].clone());
                } else {
                    next.push(merge_chain(&edges, &chain, a, cur)?);
                    changed = true;
                }
            }
        }

        // Keep-cheaper collapse of parallel merged routes (cycle arcs exempt).
        let mut by_pair: BTreeMap<(NodeId, NodeId), Vec<usize>> = BTreeMap::new();
        for (i, e) in next.iter().enumerate() {
            if !e.cycle_arc {
                by_pair.entry((e.u.min(e.v), e.u.max(e.v))).or_default().push(i);
            }
        }
        let mut drop: BTreeSet<usize> = BTreeSet::new();
        for group in by_pair.values() {
            if group.len() > 1 {
                let keep = *group
                    .iter()
                    .min_by(|&&i, &&j| cmp_finite(&next[i].len, &next[j].len))
                    .unwrap();
                for &i in group {
                    if i != keep {
                        drop.insert(i);
                        changed = true;
                    }
                }
            }
        }
        if !drop.is_empty() {
            next = next
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, e)| e)
                .collect();
        }

        edges = next;
        if !changed {
            break;
        }
    }

    build_candidate(graph, edges)
}

fn other_end<F>(e: &WorkEdge<F>, n: NodeId) -> NodeId {
    if e.u == n {
        e.v
    } else {
        e.u
    }
}

/// Concatenates a chain of edges walked from `from` to `to` into one edge.
/// The dominant (longest) constituent supplies the road class.
fn merge_chain<F: Scalar>(
    edges: &[WorkEdge<F>],
    chain: &[usize],
    from: NodeId,
    to: NodeId,
) -> Result<WorkEdge<F>, GeoError> {
    let mut geometry: Vec<GeoPoint<F>> = Vec::new();
    let mut cursor = from;
    let mut class = edges[chain[0]].class.clone();
    let mut class_len = F::neg_infinity();
    for &i in chain {
        let e = &edges[i];
        let mut part = e.geometry.clone();
        if e.u != cursor {
            part.reverse();
        }
        if geometry.is_empty() {
            geometry = part;
        } else {
            geometry.extend(part.into_iter().skip(1));
        }
        if cmp_finite(&e.len, &class_len) == std::cmp::Ordering::Greater {
            class_len = e.len;
            class = e.class.clone();
        }
        cursor = other_end(e, cursor);
    }
    debug_assert_eq!(cursor, to);
    let len = polyline_length(&geometry)?;
    Ok(WorkEdge {
        u: from,
        v: to,
        class,
        geometry,
        len,
        cycle_arc: false,
    })
}

/// Splits a loop walked from anchor `a` back to `a` into two arcs at the
/// interior node farthest from `a` along the loop.
fn split_loop<F: Scalar>(
    edges: &[WorkEdge<F>],
    chain: &[usize],
    a: NodeId,
) -> Result<(WorkEdge<F>, WorkEdge<F>), GeoError> {
    // Junction nodes between consecutive chain edges, with cumulative arc
    // length from `a`.
    let mut junctions: Vec<(NodeId, F)> = Vec::new();
    let mut cursor = a;
    let mut cum = F::zero();
    let total: F = chain.iter().fold(F::zero(), |s, &i| s + edges[i].len);
    for &i in &chain[..chain.len() - 1] {
        cum = cum + edges[i].len;
        cursor = other_end(&edges[i], cursor);
        junctions.push((cursor, cum));
    }
    let (&(m, at), _) = junctions
        .iter()
        .map(|j| {
            let fwd = j.1;
            let bwd = total - j.1;
            (j, if fwd < bwd { fwd } else { bwd })
        })
        .max_by(|a, b| cmp_finite(&a.1, &b.1).then_with(|| b.0 .0.cmp(&a.0 .0)))
        .unwrap();
    let split_at = junctions.iter().position(|&(n, c)| n == m && c == at).unwrap();
    let first = merge_or_single(edges, &chain[..=split_at], a, m)?;
    let second = merge_or_single(edges, &chain[split_at + 1..], m, a)?;
    Ok((mark_cycle(first), mark_cycle(second)))
}

/// Splits an anchor-free cycle at its two farthest-apart nodes.
fn split_cycle<F: Scalar>(
    edges: &[WorkEdge<F>],
    incident: &BTreeMap<NodeId, Vec<usize>>,
) -> Result<Vec<WorkEdge<F>>, GeoError> {
    // Walk the cycle starting at the smallest node id.
    let start = *incident.keys().next().unwrap();
    let mut order: Vec<(NodeId, usize)> = Vec::new(); // (node, edge leaving it)
    let mut cum: Vec<F> = Vec::new();
    let mut cursor = start;
    let mut come_from = usize::MAX;
    let mut total = F::zero();
    loop {
        let inc = &incident[&cursor];
        let leave = if inc[0] != come_from { inc[0] } else { inc[1] };
        order.push((cursor, leave));
        cum.push(total);
        total = total + edges[leave].len;
        cursor = other_end(&edges[leave], cursor);
        come_from = leave;
        if cursor == start {
            break;
        }
    }
    let k = order.len();
    // Farthest-apart pair by arc distance; ties towards smaller id pair.
    let mut best: Option<(F, (NodeId, NodeId), (usize, usize))> = None;
    for i in 0..k {
        for j in (i + 1)..k {
            let arc = cum[j] - cum[i];
            let sep = if arc < total - arc { arc } else { total - arc };
            let ids = (
                order[i].0.min(order[j].0),
                order[i].0.max(order[j].0),
            );
            let better = match &best {
                None => true,
                Some((cur, cur_ids, _)) => match cmp_finite(&sep, cur) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Equal => ids < *cur_ids,
                    std::cmp::Ordering::Less => false,
                },
            };
            if better {
                best = Some((sep, ids, (i, j)));
            }
        }
    }
    let (_, _, (i, j)) = best.expect("cycle has at least 3 nodes");
    let (a, b) = (order[i].0, order[j].0);
    let arc1: Vec<usize> = (i..j).map(|t| order[t].1).collect();
    let arc2: Vec<usize> = (j..k).chain(0..i).map(|t| order[t].1).collect();
    let first = merge_or_single(edges, &arc1, a, b)?;
    let second = merge_or_single(edges, &arc2, b, a)?;
    Ok(vec![mark_cycle(first), mark_cycle(second)])
}

fn merge_or_single<F: Scalar>(
    edges: &[WorkEdge<F>],
    chain: &[usize],
    from: NodeId,
    to: NodeId,
) -> Result<WorkEdge<F>, GeoError> {
    if chain.len() == 1 {
        let mut e = edges[chain[0]].clone();
        if e.u != from {
            e.geometry.reverse();
            std::mem::swap(&mut e.u, &mut e.v);
        }
        Ok(e)
    } else {
        merge_chain(edges, chain, from, to)
    }
}

fn mark_cycle<F>(mut e: WorkEdge<F>) -> WorkEdge<F> {
    e.cycle_arc = true;
    e
}

fn build_candidate<F: Scalar>(
    source: &GeoGraph<F>,
    edges: Vec<WorkEdge<F>>,
) -> Result<CandidateGraph<F>, GeoError> {
    let mut out = CandidateGraph {
        weights: None,
        nodes: BTreeMap::new(),
        edges: Vec::new(),
    };
    for e in &edges {
        out.nodes.insert(e.u, source.nodes[&e.u]);
        out.nodes.insert(e.v, source.nodes[&e.v]);
    }
    if out.nodes.is_empty() {
        // Graph without edges: keep the nodes as-is.
        out.nodes = source.nodes.clone();
    }
    for e in edges {
        let (u, v, geometry) = if e.u <= e.v {
            (e.u, e.v, e.geometry)
        } else {
            let mut g = e.geometry;
            g.reverse();
            (e.v, e.u, g)
        };
        let d = polyline_length(&geometry)?;
        let c_bend = bend_sum(&geometry)?;
        out.edges.push(CandidateEdge {
            u,
            v,
            d,
            c_cls: F::zero(),
            c_bend,
            w: F::zero(),
            class: e.class,
            geometry,
        });
    }
    out.edges.sort_by(|a, b| {
        a.u.cmp(&b.u)
            .then(a.v.cmp(&b.v))
            .then_with(|| cmp_finite(&a.d, &b.d))
            .then_with(|| cmp_finite(&a.c_bend, &b.c_bend))
    });
    Ok(out)
}

/// Sum of absolute heading changes in radians over a projected polyline.
pub(crate) fn bend_sum<F: Scalar>(geometry: &[GeoPoint<F>]) -> Result<F, GeoError> {
    let mut headings: Vec<F> = Vec::new();
    for pair in geometry.windows(2) {
        let (ax, ay) = pair[0].planar()?;
        let (bx, by) = pair[1].planar()?;
        let (dx, dy) = (bx - ax, by - ay);
        if dx == F::zero() && dy == F::zero() {
            continue;
        }
        headings.push(dy.atan2(dx));
    }
    let pi = F::of(std::f64::consts::PI);
    let two_pi = pi + pi;
    let mut total = F::zero();
    for pair in headings.windows(2) {
        let mut d = pair[1] - pair[0];
        while d > pi {
            d = d - two_pi;
        }
        while d < -pi {
            d = d + two_pi;
        }
        total = total + d.abs();
    }
    Ok(total)
}
