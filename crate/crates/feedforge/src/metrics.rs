//! Structural summary of a generated feeder: counts, line-length stats,
//! load and household figures, and tree-shape measures, with JSON and
//! plain-text renderings.

use crate::electrify::ElectricalNetwork;
use crate::scalar::Scalar;
use crate::synth::FeederGraph;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralSummary<F> {
    pub n_buses: usize,
    pub n_branches: usize,
    pub total_line_km: F,
    pub mean_line_km: F,
    pub max_line_km: F,
    pub n_load_points: usize,
    pub total_households: u64,
    pub mean_households_per_load_point: F,
    pub feeder_depth_hops: u32,
    pub root_branches: usize,
    pub n_leaves: usize,
    pub n_branching_nodes: usize,
    pub mean_depth_hops: F,
    pub peak_load_mw: F,
}

/// Computes the summary from the feeder tree and the network built on it.
/// Depth statistics count hops from the root; the root itself is excluded
/// from the depth mean, the leaf count, and the branching count, with its
/// fan-out reported separately as `root_branches`.
pub fn structural_summary<F: Scalar>(
    feeder: &FeederGraph<F>,
    net: &ElectricalNetwork<F>,
) -> StructuralSummary<F> {
    let n_buses = net.buses.len();
    let n_branches = net.lines.len();
    let mut total_line_km = F::zero();
    let mut max_line_km = F::zero();
    for line in &net.lines {
        total_line_km += line.length_km;
        if line.length_km > max_line_km {
            max_line_km = line.length_km;
        }
    }
    let mean_line_km = if n_branches > 0 {
        total_line_km / F::of(n_branches as f64)
    } else {
        F::zero()
    };

    let n_load_points = net.loads.len();
    let total_households: u64 = net.loads.iter().map(|l| u64::from(l.households)).sum();
    let mean_households_per_load_point = if n_load_points > 0 {
        F::of(total_households as f64) / F::of(n_load_points as f64)
    } else {
        F::zero()
    };
    let mut peak_load_mw = F::zero();
    for load in &net.loads {
        peak_load_mw += load.p_mw;
    }

    let degrees = feeder.degrees();
    let root_branches = degrees.get(&feeder.root).copied().unwrap_or(0);
    let mut n_leaves = 0;
    let mut n_branching_nodes = 0;
    let mut feeder_depth_hops = 0u32;
    let mut depth_sum = 0u64;
    let mut non_root = 0u64;
    for (&node, &depth) in &feeder.depth {
        if node == feeder.root {
            continue;
        }
        non_root += 1;
        depth_sum += u64::from(depth);
        if depth > feeder_depth_hops {
            feeder_depth_hops = depth;
        }
        match degrees.get(&node).copied().unwrap_or(0) {
            1 => n_leaves += 1,
            d if d >= 3 => n_branching_nodes += 1,
            _ => {}
        }
    }
    let mean_depth_hops = if non_root > 0 {
        F::of(depth_sum as f64) / F::of(non_root as f64)
    } else {
        F::zero()
    };

    StructuralSummary {
        n_buses,
        n_branches,
        total_line_km,
        mean_line_km,
        max_line_km,
        n_load_points,
        total_households,
        mean_households_per_load_point,
        feeder_depth_hops,
        root_branches,
        n_leaves,
        n_branching_nodes,
        mean_depth_hops,
        peak_load_mw,
    }
}

impl<F: Scalar> StructuralSummary<F> {
    /// Aligned two-column table for terminal display.
    pub fn to_text_table(&self) -> String {
        let rows: Vec<(&str, String)> = vec![
            ("Number of buses", self.n_buses.to_string()),
            ("Number of branches", self.n_branches.to_string()),
            ("Total line length (km)", format!("{:.3}", self.total_line_km.as_f64())),
            ("Mean line length (km)", format!("{:.3}", self.mean_line_km.as_f64())),
            ("Max line length (km)", format!("{:.3}", self.max_line_km.as_f64())),
            ("Number of load points", self.n_load_points.to_string()),
            ("Total households", self.total_households.to_string()),
            (
                "Mean households per load point",
                format!("{:.2}", self.mean_households_per_load_point.as_f64()),
            ),
            ("Feeder depth (hops)", self.feeder_depth_hops.to_string()),
            ("Mean depth (hops)", format!("{:.2}", self.mean_depth_hops.as_f64())),
            ("Root branches", self.root_branches.to_string()),
            ("Number of leaves", self.n_leaves.to_string()),
            ("Number of branching nodes", self.n_branching_nodes.to_string()),
            ("Peak load (MW)", format!("{:.3}", self.peak_load_mw.as_f64())),
        ];
        let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        let value_w = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (label, value) in rows {
            out.push_str(&format!("{label:<label_w$}  {value:>value_w$}\n"));
        }
        out
    }
}
