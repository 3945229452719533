//! Steady-state power flow for radial networks by backward/forward sweep
//! in per-unit, plus the validation quantities derived from it: maximum
//! voltage deviation, maximum branch loading, and the multi-scenario study.

use crate::electrify::ElectricalNetwork;
use crate::geograph::NodeId;
use crate::scalar::{cmp_finite, Scalar};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Apparent power magnitude at the sending end of one line, in MVA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchFlow<F> {
    pub from: NodeId,
    pub to: NodeId,
    pub s_mva: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowResult<F> {
    pub v_pu: BTreeMap<NodeId, F>,
    /// Voltage angles in radians.
    pub v_angle: BTreeMap<NodeId, F>,
    pub branch_s_mva: Vec<BranchFlow<F>>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest per-bus complex power mismatch, per-unit.
    pub max_mismatch: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowOptions<F> {
    pub tol: F,
    pub max_iter: usize,
}

impl<F: Scalar> Default for PowerFlowOptions<F> {
    fn default() -> Self {
        PowerFlowOptions {
            tol: F::of(1e-8),
            max_iter: 100,
        }
    }
}

/// Per-scenario pass/fail summary against the configured voltage floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport<F> {
    pub radial: bool,
    pub delta_v_max: F,
    pub rho_max: F,
    pub v_min_bound: F,
    pub v_bound_satisfied: bool,
}

/// True iff the line graph is one tree: connected with |lines| = |buses|-1.
pub fn check_radiality<F: Scalar>(net: &ElectricalNetwork<F>) -> bool {
    if net.buses.is_empty() || net.lines.len() + 1 != net.buses.len() {
        return false;
    }
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for l in &net.lines {
        adj.entry(l.from).or_default().push(l.to);
        adj.entry(l.to).or_default().push(l.from);
    }
    let mut seen: std::collections::BTreeSet<NodeId> =
        [net.slack_bus].into_iter().collect();
    let mut stack = vec![net.slack_bus];
    while let Some(n) = stack.pop() {
        for &m in adj.get(&n).into_iter().flatten() {
            if seen.insert(m) {
                stack.push(m);
            }
        }
    }
    seen.len() == net.buses.len()
}

/// Backward/forward sweep from a flat start. The backward pass accumulates
/// complex branch currents from the leaves with loads as constant power,
/// the forward pass drops voltages from the slack outward; iteration stops
/// when the largest per-bus power mismatch is within tolerance.
pub fn run_power_flow<F: Scalar>(
    net: &ElectricalNetwork<F>,
    options: PowerFlowOptions<F>,
) -> Result<PowerFlowResult<F>, PowerFlowError> {
    if !check_radiality(net) {
        return Err(PowerFlowError::NonRadial);
    }
    let n = net.buses.len();
    let index: BTreeMap<NodeId, usize> =
        net.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
    let slack = index[&net.slack_bus];

    // Rooted tree: order[] is a BFS order, parent/impedance per bus.
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (bus, line)
    for (l, line) in net.lines.iter().enumerate() {
        let a = index[&line.from];
        let b = index[&line.to];
        adj[a].push((b, l));
        adj[b].push((a, l));
    }
    for nbrs in adj.iter_mut() {
        nbrs.sort();
    }
    let z_base = net.base_kv * net.base_kv / net.base_mva;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n]; // (bus, line)
    let mut z_up: Vec<Complex<F>> = vec![Complex::new(F::zero(), F::zero()); n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    seen[slack] = true;
    order.push(slack);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &(v, l) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some((u, l));
                z_up[v] = Complex::new(net.lines[l].r_ohm / z_base, net.lines[l].x_ohm / z_base);
                order.push(v);
            }
        }
    }

    // Scheduled load per bus, per-unit.
    let mut s_load: Vec<Complex<F>> = vec![Complex::new(F::zero(), F::zero()); n];
    for load in &net.loads {
        let i = index[&load.bus];
        s_load[i] = s_load[i] + Complex::new(load.p_mw / net.base_mva, load.q_mvar / net.base_mva);
    }

    let slack_v = Complex::new(net.slack_v_pu, F::zero());
    let mut v: Vec<Complex<F>> = vec![slack_v; n];
    let mut branch_i: Vec<Complex<F>> = vec![Complex::new(F::zero(), F::zero()); n];
    let mut iterations = 0;
    let mut converged = false;
    let mut max_mismatch = F::infinity();

    while iterations < options.max_iter {
        iterations += 1;
        // Backward: currents into each bus, summed towards the root.
        for i in 0..n {
            branch_i[i] = (s_load[i] / v[i]).conj();
        }
        for &u in order.iter().rev() {
            if let Some((p, _)) = parent[u] {
                let add = branch_i[u];
                branch_i[p] = branch_i[p] + add;
            }
        }
        // Forward: voltage drops from the slack outward.
        for &u in order.iter() {
            if let Some((p, _)) = parent[u] {
                v[u] = v[p] - z_up[u] * branch_i[u];
            }
        }
        // Mismatch: delivered power versus schedule at every non-slack bus.
        let mut worst = F::zero();
        for i in 0..n {
            if i == slack {
                continue;
            }
            let mut net_i = branch_i[i];
            for &(c, _) in &adj[i] {
                if parent[c].map(|(p, _)| p) == Some(i) {
                    net_i = net_i - branch_i[c];
                }
            }
            let delivered = v[i] * net_i.conj();
            let miss = (delivered - s_load[i]).norm();
            if miss > worst {
                worst = miss;
            }
        }
        max_mismatch = worst;
        if worst <= options.tol {
            converged = true;
            break;
        }
    }

    let mut v_pu = BTreeMap::new();
    let mut v_angle = BTreeMap::new();
    for bus in &net.buses {
        let i = index[&bus.id];
        v_pu.insert(bus.id, v[i].norm());
        v_angle.insert(bus.id, v[i].arg());
    }
    let mut branch_s_mva: Vec<BranchFlow<F>> = net
        .lines
        .iter()
        .enumerate()
        .map(|(l, line)| {
            // Sending end is the parent side of the rooted tree.
            let a = index[&line.from];
            let b = index[&line.to];
            let (send, child) = if parent[b].map(|(p, _)| p) == Some(a) {
                (a, b)
            } else {
                (b, a)
            };
            debug_assert_eq!(parent[child].map(|(_, li)| li), Some(l));
            let s = (v[send] * branch_i[child].conj()).norm() * net.base_mva;
            BranchFlow {
                from: line.from,
                to: line.to,
                s_mva: s,
            }
        })
        .collect();
    branch_s_mva.sort_by_key(|b| (b.from, b.to));
    Ok(PowerFlowResult {
        v_pu,
        v_angle,
        branch_s_mva,
        iterations,
        converged,
        max_mismatch,
    })
}

/// Largest deviation of any bus voltage from nominal 1.0 pu.
pub fn max_voltage_deviation<F: Scalar>(
    result: &PowerFlowResult<F>,
) -> Result<F, PowerFlowError> {
    if !result.converged {
        return Err(PowerFlowError::Unconverged);
    }
    let mut worst = F::zero();
    for &v in result.v_pu.values() {
        let dev = (v - F::one()).abs();
        if dev > worst {
            worst = dev;
        }
    }
    Ok(worst)
}

/// Largest ratio of branch apparent power to its line rating.
pub fn max_branch_loading<F: Scalar>(
    result: &PowerFlowResult<F>,
    net: &ElectricalNetwork<F>,
) -> Result<F, PowerFlowError> {
    if !result.converged {
        return Err(PowerFlowError::Unconverged);
    }
    let ratings: BTreeMap<(NodeId, NodeId), F> = net
        .lines
        .iter()
        .map(|l| ((l.from, l.to), l.rating_mva))
        .collect();
    let mut worst = F::zero();
    for flow in &result.branch_s_mva {
        let rating = ratings
            .get(&(flow.from, flow.to))
            .copied()
            .ok_or(PowerFlowError::MissingRating {
                from: flow.from,
                to: flow.to,
            })?;
        if !(rating > F::zero()) {
            return Err(PowerFlowError::MissingRating {
                from: flow.from,
                to: flow.to,
            });
        }
        let rho = flow.s_mva / rating;
        if rho > worst {
            worst = rho;
        }
    }
    Ok(worst)
}

/// Runs one power flow per scenario with all loads scaled by that
/// scenario's factor, and reports each against the voltage floor.
pub fn run_scenarios<F: Scalar>(
    net: &ElectricalNetwork<F>,
    scales: &BTreeMap<String, F>,
    options: PowerFlowOptions<F>,
    v_min: F,
) -> Result<BTreeMap<String, (PowerFlowResult<F>, ValidationReport<F>)>, PowerFlowError> {
    let mut out = BTreeMap::new();
    for (name, &factor) in scales {
        if !factor.is_finite() || factor < F::zero() {
            return Err(PowerFlowError::InvalidScale {
                scenario: name.clone(),
                factor: factor.as_f64(),
            });
        }
        let mut scaled = net.clone();
        for load in &mut scaled.loads {
            load.p_mw = load.p_mw * factor;
            load.q_mvar = load.q_mvar * factor;
        }
        let result = run_power_flow(&scaled, options)?;
        if !result.converged {
            return Err(PowerFlowError::ScenarioDiverged {
                scenario: name.clone(),
            });
        }
        let delta_v_max = max_voltage_deviation(&result)?;
        let rho_max = max_branch_loading(&result, &scaled)?;
        let v_low = result
            .v_pu
            .values()
            .copied()
            .min_by(cmp_finite)
            .unwrap_or(net.slack_v_pu);
        let report = ValidationReport {
            radial: true,
            delta_v_max,
            rho_max,
            v_min_bound: v_min,
            v_bound_satisfied: v_low >= v_min,
        };
        out.insert(name.clone(), (result, report));
    }
    Ok(out)
}

/// Default scenario factors: a light sanity case, the representative peak,
/// and a stressed overload.
pub fn default_scenarios<F: Scalar>() -> BTreeMap<String, F> {
    [
        ("sanity".to_string(), F::of(0.25)),
        ("representative".to_string(), F::one()),
        ("stressed".to_string(), F::of(1.5)),
    ]
    .into_iter()
    .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum PowerFlowError {
    #[error("network is not radial")]
    NonRadial,
    #[error("power flow did not converge")]
    Unconverged,
    #[error("scenario {scenario} did not converge")]
    ScenarioDiverged { scenario: String },
    #[error("line {from}-{to} has no positive rating")]
    MissingRating { from: NodeId, to: NodeId },
    #[error("scenario {scenario} has invalid scale factor {factor}")]
    InvalidScale { scenario: String, factor: f64 },
}
