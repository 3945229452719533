//! Property tests for the structural invariants the modules promise.

use feedforge::electrify::{allocate_loads, Bus, ElectricalNetwork, Line, Load, LoadAllocationConfig};
use feedforge::geograph::{
    score_edges, simplify, ClassPenalties, GeoEdge, GeoGraph, GeoPoint, NodeId, RoadClass,
    ScoringConfig, ScoringWeights,
};
use feedforge::powerflow::{run_power_flow, run_scenarios, PowerFlowOptions};
use feedforge::synth::{
    solve_heuristic, to_feeder_graph, verify_solution, AlphaWeights, SynthesisProblem,
};
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// A connected street graph built from node positions and a parent choice
/// per non-root node, plus optional chord edges.
fn street_graph(
    coords: &[(f64, f64)],
    parents: &[usize],
    chords: &[(usize, usize)],
) -> GeoGraph<f64> {
    let n = coords.len();
    let nodes: BTreeMap<NodeId, GeoPoint<f64>> = coords
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            (
                NodeId(i as i64 + 1),
                GeoPoint::with_xy(x / 111_000.0, y / 111_000.0, x, y),
            )
        })
        .collect();
    let mut edges = Vec::new();
    let mut push = |a: usize, b: usize| {
        let (u, v) = (NodeId(a as i64 + 1), NodeId(b as i64 + 1));
        edges.push(GeoEdge {
            u,
            v,
            class: RoadClass::new("residential"),
            geometry: vec![nodes[&u].clone(), nodes[&v].clone()],
        });
    };
    for (i, &p) in parents.iter().enumerate() {
        let child = i + 1;
        push(p % child, child);
    }
    for &(a, b) in chords {
        let (a, b) = (a % n, b % n);
        if a != b {
            push(a, b);
        }
    }
    GeoGraph { nodes, edges }
}

fn coords_strategy(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..2000.0f64, 0.0..2000.0f64), n..=n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// After simplification no interior degree-2 node with two distinct
    /// neighbours remains, and protected nodes always survive.
    #[test]
    fn simplify_reaches_a_degree_two_fixed_point(
        n in 3usize..24,
        seed_coords in coords_strategy(24),
        parents in prop::collection::vec(0usize..1000, 23),
        chords in prop::collection::vec((0usize..1000, 0usize..1000), 0..4),
        protect in 0usize..1000,
    ) {
        let coords = &seed_coords[..n];
        let parents = &parents[..n - 1];
        let graph = street_graph(coords, parents, &chords);
        let protected: BTreeSet<NodeId> =
            [NodeId((protect % n) as i64 + 1)].into_iter().collect();
        let cand = simplify(&graph, &protected).unwrap();
        for id in &protected {
            prop_assert!(cand.nodes.contains_key(id), "protected node dropped");
        }
        let mut nbrs: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        let mut deg: BTreeMap<NodeId, usize> = BTreeMap::new();
        for e in &cand.edges {
            nbrs.entry(e.u).or_default().insert(e.v);
            nbrs.entry(e.v).or_default().insert(e.u);
            *deg.entry(e.u).or_default() += 1;
            *deg.entry(e.v).or_default() += 1;
        }
        for (&id, d) in &deg {
            if *d == 2 && !protected.contains(&id) {
                // A surviving degree-2 node is only legal as a ring anchor,
                // where both incident edges go to the same neighbour.
                prop_assert_eq!(
                    nbrs[&id].len(), 1,
                    "removable degree-2 node {} survived", id
                );
            }
        }
    }

    /// On trees nothing is parallel, so simplification only merges and the
    /// total arc length is conserved.
    #[test]
    fn simplify_conserves_length_on_trees(
        n in 2usize..24,
        seed_coords in coords_strategy(24),
        parents in prop::collection::vec(0usize..1000, 23),
    ) {
        let coords = &seed_coords[..n];
        let parents = &parents[..n - 1];
        let graph = street_graph(coords, parents, &[]);
        let before: f64 = graph.edges.iter().map(|e| e.arc_length().unwrap()).sum();
        let cand = simplify(&graph, &BTreeSet::new()).unwrap();
        let after: f64 = cand.edges.iter().map(|e| e.d).sum();
        prop_assert!(
            (before - after).abs() <= 1e-9 * before.max(1.0),
            "length {} became {}", before, after
        );
    }

    /// Raising lambda_d strictly raises every composite weight.
    #[test]
    fn scoring_is_monotone_in_the_distance_weight(
        n in 2usize..16,
        seed_coords in coords_strategy(16),
        parents in prop::collection::vec(0usize..1000, 15),
        lambda_d in 0.1..5.0f64,
        bump in 0.1..5.0f64,
    ) {
        let coords = &seed_coords[..n];
        let parents = &parents[..n - 1];
        let graph = street_graph(coords, parents, &[]);
        let cand = simplify(&graph, &BTreeSet::new()).unwrap();
        let mut config = ScoringConfig::<f64> {
            weights: ScoringWeights { lambda_d, lambda_c: 1.0, lambda_b: 1.0 },
            class_penalties: ClassPenalties::default(),
        };
        let low = score_edges(&cand, &config).unwrap();
        config.weights.lambda_d = lambda_d + bump;
        let high = score_edges(&cand, &config).unwrap();
        for (a, b) in low.edges.iter().zip(high.edges.iter()) {
            if a.d > 0.0 {
                prop_assert!(b.w > a.w, "weight did not grow with lambda_d");
            } else {
                prop_assert!(b.w >= a.w);
            }
        }
    }

    /// The heuristic always returns a verified radial tree containing the
    /// terminals.
    #[test]
    fn heuristic_returns_verified_radial_trees(
        n in 2usize..40,
        seed_coords in coords_strategy(40),
        parents in prop::collection::vec(0usize..1000, 39),
        chords in prop::collection::vec((0usize..1000, 0usize..1000), 0..6),
        source_pick in 0usize..1000,
        required_picks in prop::collection::vec(0usize..1000, 1..6),
    ) {
        let coords = &seed_coords[..n];
        let parents = &parents[..n - 1];
        let graph = street_graph(coords, parents, &chords);
        let cand = simplify(&graph, &graph.nodes.keys().copied().collect()).unwrap();
        let cand = score_edges(&cand, &ScoringConfig::default()).unwrap();
        let source = NodeId((source_pick % n) as i64 + 1);
        let required: BTreeSet<NodeId> = required_picks
            .iter()
            .map(|&p| NodeId((p % n) as i64 + 1))
            .filter(|&r| r != source)
            .collect();
        prop_assume!(!required.is_empty());
        let problem =
            SynthesisProblem::new(cand, source, required, AlphaWeights::default()).unwrap();
        let sol = solve_heuristic(&problem).unwrap();
        prop_assert!(verify_solution(&problem, &sol).ok());
        let feeder = to_feeder_graph(&problem, &sol).unwrap();
        prop_assert_eq!(feeder.edges.len(), feeder.nodes.len() - 1);
        prop_assert!(problem.required.iter().all(|r| feeder.nodes.contains_key(r)));
    }
}

/// A radial network whose shape is driven by the generator inputs.
fn radial_network(parents: &[usize], loads_p: &[f64]) -> ElectricalNetwork<f64> {
    let n = parents.len() + 1;
    let buses: Vec<Bus<f64>> = (1..=n)
        .map(|i| Bus { id: NodeId(i as i64), x: 0.0, y: 0.0 })
        .collect();
    let lines: Vec<Line<f64>> = parents
        .iter()
        .enumerate()
        .map(|(i, &p)| Line {
            from: NodeId((p % (i + 1)) as i64 + 1),
            to: NodeId(i as i64 + 2),
            r_ohm: 0.004 + 0.002 * (i % 5) as f64,
            x_ohm: 0.003 + 0.001 * (i % 3) as f64,
            rating_mva: 1.0,
            length_km: 0.1,
        })
        .collect();
    let loads: Vec<Load<f64>> = loads_p
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| Load {
            bus: NodeId((i % (n - 1)) as i64 + 2),
            p_mw: p / n as f64,
            q_mvar: 0.3 * p / n as f64,
            households: 1,
        })
        .collect();
    ElectricalNetwork {
        buses,
        slack_bus: NodeId(1),
        slack_v_pu: 1.0,
        base_mva: 1.0,
        base_kv: 1.0,
        lines,
        loads,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Scaling every load up never raises any bus voltage.
    #[test]
    fn voltages_fall_as_load_scales_up(
        parents in prop::collection::vec(0usize..1000, 1..30),
        loads_p in prop::collection::vec(0.0..0.5f64, 30),
        lo in 0.1..1.0f64,
        extra in 0.1..1.0f64,
    ) {
        let net = radial_network(&parents, &loads_p[..parents.len()]);
        let factors: BTreeMap<String, f64> =
            [("lo".to_string(), lo), ("hi".to_string(), lo + extra)]
                .into_iter()
                .collect();
        let out = run_scenarios(&net, &factors, PowerFlowOptions::default(), 0.5).unwrap();
        let v_lo = &out["lo"].0.v_pu;
        let v_hi = &out["hi"].0.v_pu;
        for (id, &v) in v_lo {
            prop_assert!(v_hi[id] <= v + 1e-7, "bus {} rose under load", id);
        }
    }

    /// Scaling impedances by 4 and base voltage by 2 leaves the per-unit
    /// system unchanged, so the solution is bitwise identical.
    #[test]
    fn per_unit_solution_is_invariant_under_exact_rebase(
        parents in prop::collection::vec(0usize..1000, 1..30),
        loads_p in prop::collection::vec(0.0..0.4f64, 30),
    ) {
        let net = radial_network(&parents, &loads_p[..parents.len()]);
        let mut scaled = net.clone();
        scaled.base_kv *= 2.0;
        for line in &mut scaled.lines {
            line.r_ohm *= 4.0;
            line.x_ohm *= 4.0;
        }
        let a = run_power_flow(&net, PowerFlowOptions::default()).unwrap();
        let b = run_power_flow(&scaled, PowerFlowOptions::default()).unwrap();
        prop_assert_eq!(a.v_pu, b.v_pu);
        prop_assert_eq!(a.v_angle, b.v_angle);
        prop_assert_eq!(a.iterations, b.iterations);
    }

    /// Allocation depends on weight ratios only: a power-of-two rescale of
    /// all weights gives bitwise identical loads.
    #[test]
    fn allocation_is_invariant_under_weight_rescale(
        weights in prop::collection::btree_map(1i64..200, 0.01..50.0f64, 1..25),
        households in 1u32..2000,
        k in -3i32..6,
    ) {
        let weights: BTreeMap<NodeId, f64> =
            weights.into_iter().map(|(id, w)| (NodeId(id), w)).collect();
        let cfg = LoadAllocationConfig {
            total_p_mw: 1.44,
            beta: 0.0,
            ..LoadAllocationConfig::default()
        };
        let scale = (2.0f64).powi(k);
        let scaled: BTreeMap<NodeId, f64> =
            weights.iter().map(|(&id, &w)| (id, w * scale)).collect();
        let a = allocate_loads(&weights, &cfg, households).unwrap();
        let b = allocate_loads(&scaled, &cfg, households).unwrap();
        prop_assert_eq!(a, b);
    }
}
