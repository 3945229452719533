//! Dual ascent lower bound for the rooted connection problem. The graph is
//! bidirected, the source component is the root, and every terminal raises
//! the dual of its unreached cut until some arc saturates. The sum of the
//! raises is a valid lower bound on any tree that connects all terminals to
//! the root, because each raise charges a distinct unit of cut capacity.

use super::sub::Sub;
use crate::scalar::Scalar;

pub(crate) struct DualAscent<F> {
    pub lower_bound: F,
    pub feasible: bool,
}

pub(crate) fn dual_ascent<F: Scalar>(sub: &Sub, costs: &[F]) -> DualAscent<F> {
    if sub.infeasible {
        return DualAscent {
            lower_bound: F::zero(),
            feasible: false,
        };
    }
    let terminals = sub.active_terminals();
    if terminals.is_empty() {
        return DualAscent {
            lower_bound: F::zero(),
            feasible: true,
        };
    }
    // Two arcs per edge: arc 2k is u -> v, arc 2k + 1 is v -> u.
    let m = sub.edges.len();
    let mut reduced: Vec<F> = Vec::with_capacity(2 * m);
    for e in &sub.edges {
        reduced.push(costs[e.id]);
        reduced.push(costs[e.id]);
    }
    let arc = |a: usize| -> (usize, usize) {
        let e = &sub.edges[a / 2];
        if a % 2 == 0 {
            (e.u, e.v)
        } else {
            (e.v, e.u)
        }
    };
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); sub.n];
    let mut in_arcs: Vec<Vec<usize>> = vec![Vec::new(); sub.n];
    for a in 0..2 * m {
        let (t, h) = arc(a);
        out_arcs[t].push(a);
        in_arcs[h].push(a);
    }
    let saturated = |reduced: &[F], a: usize| reduced[a] <= F::zero();

    let mut lb = F::zero();
    loop {
        // Components already reached from the root through saturated arcs.
        let mut root_reach = vec![false; sub.n];
        root_reach[sub.root] = true;
        let mut stack = vec![sub.root];
        while let Some(c) = stack.pop() {
            for &a in &out_arcs[c] {
                let (_, h) = arc(a);
                if saturated(&reduced, a) && !root_reach[h] {
                    root_reach[h] = true;
                    stack.push(h);
                }
            }
        }
        let actives: Vec<usize> = terminals.iter().copied().filter(|&t| !root_reach[t]).collect();
        if actives.is_empty() {
            return DualAscent {
                lower_bound: lb,
                feasible: true,
            };
        }
        for t in actives {
            // W: components that reach t through saturated arcs.
            let mut in_w = vec![false; sub.n];
            in_w[t] = true;
            let mut stack = vec![t];
            while let Some(c) = stack.pop() {
                for &a in &in_arcs[c] {
                    let (tail, _) = arc(a);
                    if saturated(&reduced, a) && !in_w[tail] {
                        in_w[tail] = true;
                        stack.push(tail);
                    }
                }
            }
            if in_w[sub.root] {
                continue;
            }
            // Raise the dual of W by the smallest reduced cost entering it.
            let mut delta: Option<F> = None;
            for a in 0..2 * m {
                let (tail, head) = arc(a);
                if in_w[head] && !in_w[tail] {
                    let c = reduced[a];
                    delta = Some(match delta {
                        Some(d) if d <= c => d,
                        _ => c,
                    });
                }
            }
            let delta = match delta {
                Some(d) => d,
                None => {
                    return DualAscent {
                        lower_bound: lb,
                        feasible: false,
                    }
                }
            };
            for a in 0..2 * m {
                let (tail, head) = arc(a);
                if in_w[head] && !in_w[tail] {
                    reduced[a] = reduced[a] - delta;
                }
            }
            lb = lb + delta;
        }
    }
}
