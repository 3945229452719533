//! Electrical realization of a feeder tree: class-based line impedances,
//! spatially weighted load allocation with exact totals, and assembly into
//! a validated network with a slack source at the root.

use crate::geograph::{GeoPoint, NodeId, RoadClass};
use crate::scalar::{cmp_finite, Scalar};
use crate::synth::FeederGraph;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Per-class conductor template. Impedances scale linearly with length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineTemplate<F> {
    pub r_per_km: F,
    pub x_per_km: F,
    pub rating_mva: F,
}

impl<F: Scalar> LineTemplate<F> {
    pub fn validate(&self, class: &RoadClass) -> Result<(), ElectrifyError> {
        for (name, v) in [
            ("r_per_km", self.r_per_km),
            ("x_per_km", self.x_per_km),
            ("rating_mva", self.rating_mva),
        ] {
            if !v.is_finite() || v <= F::zero() {
                return Err(ElectrifyError::InvalidConfig(format!(
                    "template for class {}: {name} must be positive, got {v}",
                    class.as_str()
                )));
            }
        }
        Ok(())
    }
}

/// Residential streets get a light LV cable, collector roads a stiffer
/// trunk cable; magnitudes are representative rather than asset-calibrated.
pub fn default_templates<F: Scalar>() -> BTreeMap<RoadClass, LineTemplate<F>> {
    let residential = LineTemplate {
        r_per_km: F::of(0.642),
        x_per_km: F::of(0.083),
        rating_mva: F::of(0.4),
    };
    let trunk = LineTemplate {
        r_per_km: F::of(0.193),
        x_per_km: F::of(0.086),
        rating_mva: F::of(4.0),
    };
    let mut t = BTreeMap::new();
    t.insert(RoadClass::new("residential"), residential);
    for class in ["tertiary", "secondary", "primary"] {
        t.insert(RoadClass::new(class), trunk.clone());
    }
    t
}

/// Load allocation parameters: weights follow
/// `omega_i = (A_i + eps)^eta / (delta_i + eps)^beta` where `A_i` counts
/// activity points near the bus and `delta_i` is the distance to the
/// nearest demand centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadAllocationConfig<F> {
    pub eta: F,
    pub beta: F,
    pub epsilon: F,
    pub total_p_mw: F,
    /// Global power factor in (0, 1].
    pub power_factor: F,
    /// Per-bus overrides of the global power factor.
    pub power_factor_overrides: BTreeMap<NodeId, F>,
    pub centroids: Vec<GeoPoint<F>>,
    pub activity_radius_m: F,
}

impl<F: Scalar> Default for LoadAllocationConfig<F> {
    fn default() -> Self {
        LoadAllocationConfig {
            eta: F::one(),
            beta: F::one(),
            epsilon: F::of(1e-6),
            total_p_mw: F::one(),
            power_factor: F::of(0.95),
            power_factor_overrides: BTreeMap::new(),
            centroids: Vec::new(),
            activity_radius_m: F::of(60.0),
        }
    }
}

impl<F: Scalar> LoadAllocationConfig<F> {
    pub fn validate(&self) -> Result<(), ElectrifyError> {
        if !(self.epsilon > F::zero()) || !self.epsilon.is_finite() {
            return Err(ElectrifyError::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.total_p_mw >= F::zero()) || !self.total_p_mw.is_finite() {
            return Err(ElectrifyError::InvalidConfig(format!(
                "total_p_mw must be non-negative, got {}",
                self.total_p_mw
            )));
        }
        for (bus, pf) in std::iter::once((None, self.power_factor)).chain(
            self.power_factor_overrides
                .iter()
                .map(|(&b, &pf)| (Some(b), pf)),
        ) {
            if !(pf > F::zero() && pf <= F::one()) {
                let place = match bus {
                    Some(b) => format!("bus {b}"),
                    None => "global".to_string(),
                };
                return Err(ElectrifyError::InvalidConfig(format!(
                    "power factor ({place}) must be in (0, 1], got {pf}"
                )));
            }
        }
        for (name, v) in [("eta", self.eta), ("beta", self.beta)] {
            if !v.is_finite() {
                return Err(ElectrifyError::InvalidConfig(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if !(self.activity_radius_m >= F::zero()) {
            return Err(ElectrifyError::InvalidConfig(format!(
                "activity_radius_m must be non-negative, got {}",
                self.activity_radius_m
            )));
        }
        Ok(())
    }

    fn pf_at(&self, bus: NodeId) -> F {
        self.power_factor_overrides
            .get(&bus)
            .copied()
            .unwrap_or(self.power_factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bus<F> {
    pub id: NodeId,
    pub x: F,
    pub y: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line<F> {
    pub from: NodeId,
    pub to: NodeId,
    pub r_ohm: F,
    pub x_ohm: F,
    pub rating_mva: F,
    pub length_km: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Load<F> {
    pub bus: NodeId,
    pub p_mw: F,
    pub q_mvar: F,
    pub households: u32,
}

/// The feeder as a power-system model: buses in the planar frame, lines
/// with absolute impedances, aggregated loads, and a slack source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectricalNetwork<F> {
    pub buses: Vec<Bus<F>>,
    pub slack_bus: NodeId,
    pub slack_v_pu: F,
    pub base_mva: F,
    pub base_kv: F,
    pub lines: Vec<Line<F>>,
    pub loads: Vec<Load<F>>,
}

impl<F: Scalar> ElectricalNetwork<F> {
    pub fn total_load(&self) -> (F, F) {
        let mut p = F::zero();
        let mut q = F::zero();
        for l in &self.loads {
            p = p + l.p_mw;
            q = q + l.q_mvar;
        }
        (p, q)
    }
}

/// Maps each feeder edge to a line using its road class template:
/// `r = r_per_km * length_km` exactly, rating copied through.
pub fn assign_line_params<F: Scalar>(
    feeder: &FeederGraph<F>,
    templates: &BTreeMap<RoadClass, LineTemplate<F>>,
) -> Result<Vec<Line<F>>, ElectrifyError> {
    for (class, t) in templates {
        t.validate(class)?;
    }
    let mut lines = Vec::with_capacity(feeder.edges.len());
    for e in &feeder.edges {
        let t = templates
            .get(&e.class)
            .ok_or_else(|| ElectrifyError::MissingTemplate(e.class.clone()))?;
        let length_km = e.length_m / F::of(1000.0);
        lines.push(Line {
            from: e.u,
            to: e.v,
            r_ohm: t.r_per_km * length_km,
            x_ohm: t.x_per_km * length_km,
            rating_mva: t.rating_mva,
            length_km,
        });
    }
    Ok(lines)
}

/// Spatial allocation weight for every feeder node except the root, which
/// is the substation and carries no household load. With no activity layer
/// the count defaults to 1 everywhere, leaving pure inverse-distance
/// weighting; with `beta = 0` centroids are not consulted at all.
pub fn compute_weights<F: Scalar>(
    feeder: &FeederGraph<F>,
    cfg: &LoadAllocationConfig<F>,
    activity_points: &[GeoPoint<F>],
) -> Result<BTreeMap<NodeId, F>, ElectrifyError> {
    cfg.validate()?;
    if cfg.beta != F::zero() && cfg.centroids.is_empty() {
        return Err(ElectrifyError::EmptyCentroids);
    }
    let mut weights = BTreeMap::new();
    for (&id, point) in &feeder.nodes {
        if id == feeder.root {
            continue;
        }
        let (x, y) = point
            .planar()
            .map_err(|_| ElectrifyError::Unprojected(id))?;
        let a = if activity_points.is_empty() {
            F::one()
        } else {
            let mut count = 0usize;
            for p in activity_points {
                let (px, py) = p.planar().map_err(|_| ElectrifyError::Unprojected(id))?;
                let dist = ((px - x) * (px - x) + (py - y) * (py - y)).sqrt();
                if dist <= cfg.activity_radius_m {
                    count += 1;
                }
            }
            F::from_usize(count).unwrap()
        };
        let numerator = (a + cfg.epsilon).powf(cfg.eta);
        let denominator = if cfg.beta == F::zero() {
            F::one()
        } else {
            let mut nearest: Option<F> = None;
            for c in &cfg.centroids {
                let (cx, cy) = c.planar().map_err(|_| ElectrifyError::Unprojected(id))?;
                let dist = ((cx - x) * (cx - x) + (cy - y) * (cy - y)).sqrt();
                nearest = Some(match nearest {
                    Some(b) if b <= dist => b,
                    _ => dist,
                });
            }
            (nearest.expect("centroids checked nonempty") + cfg.epsilon).powf(cfg.beta)
        };
        weights.insert(id, numerator / denominator);
    }
    Ok(weights)
}

/// Splits households and power across buses in proportion to the weights.
/// Households use largest-remainder rounding so they sum exactly; buses
/// rounding to zero households carry no load record; active power is then
/// shared over the remaining load points with the float residue folded
/// onto the heaviest one, and `Q = P * sqrt(1 - pf^2) / pf` (the algebraic
/// form of `P * tan(arccos pf)`).
pub fn allocate_loads<F: Scalar>(
    weights: &BTreeMap<NodeId, F>,
    cfg: &LoadAllocationConfig<F>,
    households_total: u32,
) -> Result<Vec<Load<F>>, ElectrifyError> {
    cfg.validate()?;
    let mut sum = F::zero();
    for (&id, &w) in weights {
        if !w.is_finite() || w < F::zero() {
            return Err(ElectrifyError::InvalidConfig(format!(
                "weight at bus {id} must be finite and non-negative, got {w}"
            )));
        }
        sum = sum + w;
    }
    if !(sum > F::zero()) {
        return Err(ElectrifyError::ZeroWeights);
    }
    if households_total == 0 {
        if cfg.total_p_mw > F::zero() {
            return Err(ElectrifyError::ZeroHouseholdsWithLoad);
        }
        return Ok(Vec::new());
    }

    // Households by largest remainder: floors first, then one each to the
    // largest fractional parts (ties: weight, then id).
    let total = F::from_u32(households_total).unwrap();
    let mut floors: BTreeMap<NodeId, u32> = BTreeMap::new();
    let mut remainders: Vec<(NodeId, F, F)> = Vec::new();
    let mut assigned: u32 = 0;
    for (&id, &w) in weights {
        let quota = total * w / sum;
        let floor = quota.floor();
        let count = floor.as_f64() as u32;
        floors.insert(id, count);
        assigned += count;
        remainders.push((id, quota - floor, w));
    }
    let mut leftover = households_total - assigned;
    remainders.sort_by(|a, b| {
        cmp_finite(&b.1, &a.1)
            .then(cmp_finite(&b.2, &a.2))
            .then(a.0.cmp(&b.0))
    });
    for (id, _, _) in &remainders {
        if leftover == 0 {
            break;
        }
        *floors.get_mut(id).unwrap() += 1;
        leftover -= 1;
    }

    // Load points are the buses that kept at least one household.
    let points: Vec<NodeId> = floors
        .iter()
        .filter(|(_, &h)| h > 0)
        .map(|(&id, _)| id)
        .collect();
    let mut point_sum = F::zero();
    for &id in &points {
        point_sum = point_sum + weights[&id];
    }
    let mut p: BTreeMap<NodeId, F> = BTreeMap::new();
    let mut p_sum = F::zero();
    for &id in &points {
        let share = cfg.total_p_mw * weights[&id] / point_sum;
        p.insert(id, share);
        p_sum = p_sum + share;
    }
    // Fold the float residue onto the heaviest point so the sum is exact.
    let heaviest = points
        .iter()
        .copied()
        .max_by(|a, b| cmp_finite(&weights[a], &weights[b]).then(b.cmp(a)))
        .expect("households_total > 0 leaves at least one point");
    *p.get_mut(&heaviest).unwrap() += cfg.total_p_mw - p_sum;

    let loads = points
        .iter()
        .map(|&bus| {
            let pf = cfg.pf_at(bus);
            let tan_phi = (F::one() - pf * pf).sqrt() / pf;
            Load {
                bus,
                p_mw: p[&bus],
                q_mvar: p[&bus] * tan_phi,
                households: floors[&bus],
            }
        })
        .collect();
    Ok(loads)
}

/// Assembles the network and validates every structural invariant,
/// collecting all offenders rather than stopping at the first.
pub fn build_network<F: Scalar>(
    feeder: &FeederGraph<F>,
    lines: Vec<Line<F>>,
    loads: Vec<Load<F>>,
    slack_v_pu: F,
    base_mva: F,
    base_kv: F,
) -> Result<ElectricalNetwork<F>, ElectrifyError> {
    let mut issues = Vec::new();
    let mut buses = Vec::with_capacity(feeder.nodes.len());
    for (&id, point) in &feeder.nodes {
        match point.planar() {
            Ok((x, y)) => buses.push(Bus { id, x, y }),
            Err(_) => issues.push(format!("bus {id} has no projected coordinates")),
        }
    }
    for (name, v) in [
        ("slack_v_pu", slack_v_pu),
        ("base_mva", base_mva),
        ("base_kv", base_kv),
    ] {
        if !v.is_finite() || v <= F::zero() {
            issues.push(format!("{name} must be positive, got {v}"));
        }
    }
    let feeder_edges: BTreeMap<(NodeId, NodeId), ()> =
        feeder.edges.iter().map(|e| ((e.u, e.v), ())).collect();
    if lines.len() != feeder.edges.len() {
        issues.push(format!(
            "{} lines for {} feeder edges",
            lines.len(),
            feeder.edges.len()
        ));
    }
    for l in &lines {
        if !feeder_edges.contains_key(&(l.from, l.to)) {
            issues.push(format!("line {}-{} is not a feeder edge", l.from, l.to));
        }
        for (name, v) in [
            ("r_ohm", l.r_ohm),
            ("x_ohm", l.x_ohm),
            ("rating_mva", l.rating_mva),
            ("length_km", l.length_km),
        ] {
            if !v.is_finite() || v <= F::zero() {
                issues.push(format!("line {}-{}: {name} must be positive, got {v}", l.from, l.to));
            }
        }
    }
    for load in &loads {
        if !feeder.nodes.contains_key(&load.bus) {
            issues.push(format!("load on bus {} which is not in the feeder", load.bus));
        }
        if !load.p_mw.is_finite() || load.p_mw < F::zero() {
            issues.push(format!("load at {}: p_mw must be non-negative", load.bus));
        }
        if !load.q_mvar.is_finite() {
            issues.push(format!("load at {}: q_mvar must be finite", load.bus));
        }
    }
    let net = ElectricalNetwork {
        buses,
        slack_bus: feeder.root,
        slack_v_pu,
        base_mva,
        base_kv,
        lines,
        loads,
    };
    issues.extend(validate_structure(&net));
    if issues.is_empty() {
        Ok(net)
    } else {
        Err(ElectrifyError::Validation(issues))
    }
}

/// Structural checks shared with import: radial, rooted at the slack bus,
/// no dangling references.
pub(crate) fn validate_structure<F: Scalar>(net: &ElectricalNetwork<F>) -> Vec<String> {
    let mut issues = Vec::new();
    let ids: BTreeMap<NodeId, ()> = net.buses.iter().map(|b| (b.id, ())).collect();
    if ids.len() != net.buses.len() {
        issues.push("duplicate bus ids".to_string());
    }
    if !ids.contains_key(&net.slack_bus) {
        issues.push(format!("slack bus {} not in bus list", net.slack_bus));
    }
    for l in &net.lines {
        for end in [l.from, l.to] {
            if !ids.contains_key(&end) {
                issues.push(format!("line {}-{} references unknown bus {end}", l.from, l.to));
            }
        }
    }
    for load in &net.loads {
        if !ids.contains_key(&load.bus) {
            issues.push(format!("load references unknown bus {}", load.bus));
        }
    }
    if !issues.is_empty() {
        return issues;
    }
    if net.lines.len() + 1 != net.buses.len() {
        issues.push(format!(
            "{} lines on {} buses breaks radiality",
            net.lines.len(),
            net.buses.len()
        ));
    }
    // Connectivity from the slack.
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for l in &net.lines {
        adj.entry(l.from).or_default().push(l.to);
        adj.entry(l.to).or_default().push(l.from);
    }
    let mut seen: std::collections::BTreeSet<NodeId> = [net.slack_bus].into_iter().collect();
    let mut stack = vec![net.slack_bus];
    while let Some(n) = stack.pop() {
        for &m in adj.get(&n).into_iter().flatten() {
            if seen.insert(m) {
                stack.push(m);
            }
        }
    }
    if seen.len() != net.buses.len() {
        issues.push(format!(
            "{} of {} buses unreachable from the slack",
            net.buses.len() - seen.len(),
            net.buses.len()
        ));
    }
    issues
}

#[derive(Debug, thiserror::Error)]
pub enum ElectrifyError {
    #[error("no line template for road class {}", .0.as_str())]
    MissingTemplate(RoadClass),
    #[error("demand centroids are required when beta > 0")]
    EmptyCentroids,
    #[error("node {0} has no projected coordinates")]
    Unprojected(NodeId),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("all allocation weights are zero")]
    ZeroWeights,
    #[error("households_total is zero but total_p_mw is positive")]
    ZeroHouseholdsWithLoad,
    #[error("network validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
}


#[cfg(test)]
mod tests {
    use super::testnet::feeder_from;
    use super::*;
    use crate::synth::FeederGraph;

    /// Feeder shaped like a path 1 - 2 - 3 with 100 m residential edges,
    /// placed on a planar frame.
    fn path_feeder() -> FeederGraph<f64> {
        feeder_from(&[(1, 2, 100.0, "residential"), (2, 3, 100.0, "residential")])
    }

    #[test]
    fn line_params_are_exact_products() {
        let feeder = feeder_from(&[(1, 2, 1000.0, "residential"), (2, 3, 103.0, "tertiary")]);
        let lines = assign_line_params(&feeder, &default_templates()).unwrap();
        assert_eq!(lines[0].r_ohm, 0.642);
        assert_eq!(lines[0].x_ohm, 0.083);
        assert_eq!(lines[0].rating_mva, 0.4);
        // 103 m of trunk cable at 0.193 ohm/km.
        assert_eq!(lines[1].length_km, 0.103);
        assert_eq!(lines[1].r_ohm, 0.193 * 0.103);
        assert_eq!(lines[1].rating_mva, 4.0);
    }

    #[test]
    fn half_kilometre_at_half_ohm_is_a_quarter_ohm() {
        let mut templates = default_templates::<f64>();
        templates.insert(
            RoadClass::new("residential"),
            LineTemplate {
                r_per_km: 0.5,
                x_per_km: 0.1,
                rating_mva: 1.0,
            },
        );
        let feeder = feeder_from(&[(1, 2, 103.0, "residential")]);
        let lines = assign_line_params(&feeder, &templates).unwrap();
        assert_eq!(lines[0].r_ohm, 0.0515);
    }

    #[test]
    fn missing_template_names_the_class() {
        let feeder = feeder_from(&[(1, 2, 100.0, "busway")]);
        let err = assign_line_params(&feeder, &default_templates::<f64>()).unwrap_err();
        assert!(err.to_string().contains("busway"));
    }

    #[test]
    fn zero_exponents_make_uniform_weights() {
        let feeder = path_feeder();
        let cfg = LoadAllocationConfig::<f64> {
            eta: 0.0,
            beta: 0.0,
            ..Default::default()
        };
        let w = compute_weights(&feeder, &cfg, &[]).unwrap();
        assert!(w.values().all(|&v| v == 1.0));
    }

    #[test]
    fn weight_formula_matches_hand_value() {
        // A = 3 activity points at the node, centroid on the node, eps = 1,
        // eta = beta = 1: omega = (3 + 1) / (0 + 1) = 4.
        let feeder = path_feeder();
        let at_two = feeder.nodes[&NodeId(2)];
        let cfg = LoadAllocationConfig::<f64> {
            epsilon: 1.0,
            centroids: vec![at_two],
            ..Default::default()
        };
        let activity = vec![at_two, at_two, at_two];
        let w = compute_weights(&feeder, &cfg, &activity).unwrap();
        assert_eq!(w[&NodeId(2)], 4.0);
        assert!(!w.contains_key(&NodeId(1)), "root carries no weight");
    }

    #[test]
    fn beta_without_centroids_is_rejected() {
        let feeder = path_feeder();
        let cfg = LoadAllocationConfig::<f64>::default();
        assert!(matches!(
            compute_weights(&feeder, &cfg, &[]),
            Err(ElectrifyError::EmptyCentroids)
        ));
    }

    #[test]
    fn uniform_weights_split_power_evenly() {
        let cfg = LoadAllocationConfig::<f64> {
            total_p_mw: 1.0,
            ..Default::default()
        };
        let weights: BTreeMap<NodeId, f64> =
            (1..=4).map(|i| (NodeId(i), 2.5)).collect();
        let loads = allocate_loads(&weights, &cfg, 8).unwrap();
        assert_eq!(loads.len(), 4);
        for l in &loads {
            assert_eq!(l.p_mw, 0.25);
            assert_eq!(l.households, 2);
        }
    }

    #[test]
    fn power_factor_sets_reactive_share() {
        let cfg = LoadAllocationConfig::<f64> {
            total_p_mw: 1.0,
            power_factor: 0.8,
            ..Default::default()
        };
        let weights: BTreeMap<NodeId, f64> = (1..=2).map(|i| (NodeId(i), 1.0)).collect();
        let loads = allocate_loads(&weights, &cfg, 2).unwrap();
        for l in &loads {
            // tan(arccos 0.8) = 0.75 by the 3-4-5 triangle; float evaluation
            // of sqrt(1 - 0.64)/0.8 lands within a couple of ulps.
            assert!((l.q_mvar - 0.75 * l.p_mw).abs() <= 1e-15 * l.p_mw);
        }
        let unity = LoadAllocationConfig::<f64> {
            power_factor: 1.0,
            ..cfg
        };
        let loads = allocate_loads(&weights, &unity, 2).unwrap();
        assert!(loads.iter().all(|l| l.q_mvar == 0.0));
    }

    #[test]
    fn power_total_is_exact_under_skewed_weights() {
        let cfg = LoadAllocationConfig::<f64> {
            total_p_mw: 1.44,
            ..Default::default()
        };
        let weights: BTreeMap<NodeId, f64> = [
            (NodeId(1), 0.137),
            (NodeId(2), 2.9),
            (NodeId(3), 0.61),
            (NodeId(4), 7.003),
            (NodeId(5), 1.0 / 3.0),
        ]
        .into_iter()
        .collect();
        let loads = allocate_loads(&weights, &cfg, 17).unwrap();
        let total: f64 = loads.iter().map(|l| l.p_mw).sum();
        assert!((total - 1.44).abs() <= 1e-12 * 1.44);
        let households: u32 = loads.iter().map(|l| l.households).sum();
        assert_eq!(households, 17);
    }

    #[test]
    fn tiny_weights_are_thinned_away() {
        // Bus 3's share of 10 households rounds to zero, so it carries no
        // load record and the other buses absorb the total.
        let cfg = LoadAllocationConfig::<f64> {
            total_p_mw: 1.0,
            ..Default::default()
        };
        let weights: BTreeMap<NodeId, f64> = [
            (NodeId(1), 10.0),
            (NodeId(2), 10.0),
            (NodeId(3), 1e-9),
        ]
        .into_iter()
        .collect();
        let loads = allocate_loads(&weights, &cfg, 10).unwrap();
        assert_eq!(loads.len(), 2);
        assert!(loads.iter().all(|l| l.bus != NodeId(3)));
        let total: f64 = loads.iter().map(|l| l.p_mw).sum();
        assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn zero_households_with_load_is_an_error() {
        let cfg = LoadAllocationConfig::<f64> {
            total_p_mw: 1.0,
            ..Default::default()
        };
        let weights: BTreeMap<NodeId, f64> = [(NodeId(1), 1.0)].into_iter().collect();
        assert!(matches!(
            allocate_loads(&weights, &cfg, 0),
            Err(ElectrifyError::ZeroHouseholdsWithLoad)
        ));
    }

    #[test]
    fn network_assembles_and_validates() {
        let feeder = path_feeder();
        let lines = assign_line_params(&feeder, &default_templates()).unwrap();
        let cfg = LoadAllocationConfig::<f64> {
            beta: 0.0,
            total_p_mw: 0.5,
            ..Default::default()
        };
        let weights = compute_weights(&feeder, &cfg, &[]).unwrap();
        let loads = allocate_loads(&weights, &cfg, 6).unwrap();
        let net = build_network(&feeder, lines, loads, 1.0, 1.0, 11.0).unwrap();
        assert_eq!(net.slack_bus, NodeId(1));
        assert_eq!(net.buses.len(), 3);
        assert_eq!(net.lines.len(), 2);
        let (p, _) = net.total_load();
        assert!((p - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn foreign_load_bus_is_listed_in_the_error() {
        let feeder = path_feeder();
        let lines = assign_line_params(&feeder, &default_templates()).unwrap();
        let loads = vec![Load {
            bus: NodeId(99),
            p_mw: 0.1,
            q_mvar: 0.0,
            households: 1,
        }];
        let err = build_network(&feeder, lines, loads, 1.0, 1.0, 11.0).unwrap_err();
        assert!(err.to_string().contains("99"));
    }

    #[test]
    fn impedance_per_km_is_consistent_within_a_class() {
        let feeder = feeder_from(&[
            (1, 2, 87.3, "residential"),
            (2, 3, 201.9, "residential"),
            (3, 4, 64.0, "residential"),
        ]);
        let lines = assign_line_params(&feeder, &default_templates()).unwrap();
        let ratios: Vec<f64> = lines.iter().map(|l| l.r_ohm / l.length_km).collect();
        for r in &ratios {
            assert_eq!(*r, ratios[0]);
        }
    }
}
