//! Contracted view of a synthesis instance under branching decisions:
//! forced-in edges are contracted into supernodes, forced-out edges are
//! dropped. Bounds and heuristics run on this view and report original
//! edge ids.

use super::{EdgeId, SynthesisProblem};
use crate::geograph::NodeId;
use crate::scalar::Scalar;
use std::collections::BTreeMap;

/// One alive edge of the contracted view.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SubEdge {
    pub u: usize,
    pub v: usize,
    pub id: EdgeId,
}

#[derive(Debug, Clone)]
pub(crate) struct Sub {
    /// Number of contracted components.
    pub n: usize,
    /// Component of the source.
    pub root: usize,
    pub terminal: Vec<bool>,
    pub edges: Vec<SubEdge>,
    /// True when a forced-in edge closed a cycle, which no tree contains.
    pub infeasible: bool,
}

/// Dense indexing of the problem's nodes, shared across the search.
pub(crate) struct NodeIndex {
    pub ids: Vec<NodeId>,
    pub index: BTreeMap<NodeId, usize>,
}

impl NodeIndex {
    pub fn new<F: Scalar>(problem: &SynthesisProblem<F>) -> Self {
        let ids: Vec<NodeId> = problem.graph.nodes.keys().copied().collect();
        let index = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        NodeIndex { ids, index }
    }
}

impl Sub {
    /// Builds the view for a set of decisions. `state[e]` is `Some(true)`
    /// for forced-in, `Some(false)` for forced-out, `None` for free.
    pub fn build<F: Scalar>(
        problem: &SynthesisProblem<F>,
        nodes: &NodeIndex,
        state: &[Option<bool>],
    ) -> Sub {
        let n_nodes = nodes.ids.len();
        let mut dsu: Vec<usize> = (0..n_nodes).collect();
        fn find(dsu: &mut [usize], mut a: usize) -> usize {
            while dsu[a] != a {
                dsu[a] = dsu[dsu[a]];
                a = dsu[a];
            }
            a
        }
        let mut infeasible = false;
        for (e, &s) in state.iter().enumerate() {
            if s != Some(true) {
                continue;
            }
            let ed = &problem.graph.edges[e];
            let ru = find(&mut dsu, nodes.index[&ed.u]);
            let rv = find(&mut dsu, nodes.index[&ed.v]);
            if ru == rv {
                infeasible = true;
            } else {
                dsu[ru.max(rv)] = ru.min(rv);
            }
        }
        // Compact component labels.
        let mut comp_of = vec![usize::MAX; n_nodes];
        let mut n = 0;
        for i in 0..n_nodes {
            let r = find(&mut dsu, i);
            if comp_of[r] == usize::MAX {
                comp_of[r] = n;
                n += 1;
            }
            comp_of[i] = comp_of[r];
        }
        let mut terminal = vec![false; n];
        for id in problem.terminals() {
            terminal[comp_of[nodes.index[&id]]] = true;
        }
        // Forced-in endpoints must be kept, so their supernode is terminal.
        for (e, &s) in state.iter().enumerate() {
            if s == Some(true) {
                let ed = &problem.graph.edges[e];
                terminal[comp_of[nodes.index[&ed.u]]] = true;
            }
        }
        let root = comp_of[nodes.index[&problem.source]];
        let mut edges = Vec::new();
        for (e, &s) in state.iter().enumerate() {
            if s.is_some() {
                continue;
            }
            let ed = &problem.graph.edges[e];
            let u = comp_of[nodes.index[&ed.u]];
            let v = comp_of[nodes.index[&ed.v]];
            if u != v {
                edges.push(SubEdge { u, v, id: e });
            }
        }
        Sub {
            n,
            root,
            terminal,
            edges,
            infeasible,
        }
    }

    pub fn active_terminals(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&c| self.terminal[c] && c != self.root)
            .collect()
    }
}
