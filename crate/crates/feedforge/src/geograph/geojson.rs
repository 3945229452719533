use super::{geodesic_m, GeoError, GeoGraph, GeoEdge, GeoPoint, NodeId, RoadClass};
use crate::scalar::Scalar;
use serde_json::Value;
use std::collections::BTreeSet;

/// Options for GeoJSON ingestion.
#[derive(Debug, Clone)]
pub struct GeoJsonOptions {
    /// Endpoints closer than this (metres) merge into one node.
    pub snap_tolerance_m: f64,
    /// Road classes to keep; `None` keeps everything.
    pub keep_classes: Option<BTreeSet<RoadClass>>,
    /// Class applied to features without a class property.
    pub default_class: RoadClass,
}

impl Default for GeoJsonOptions {
    fn default() -> Self {
        GeoJsonOptions {
            snap_tolerance_m: 0.5,
            keep_classes: None,
            default_class: RoadClass::new("residential"),
        }
    }
}

/// Parses a GeoJSON FeatureCollection of LineStrings into a street graph.
/// Each LineString becomes one edge chain; endpoints within the snap
/// tolerance merge into a single node. Interior vertices stay geometry only.
pub fn parse_geojson<F: Scalar>(
    raw: &str,
    options: &GeoJsonOptions,
) -> Result<GeoGraph<F>, GeoError> {
    let doc: Value =
        serde_json::from_str(raw).map_err(|e| GeoError::GeoJsonParse(e.to_string()))?;
    let features = collection_features(&doc)?;

    let mut graph: GeoGraph<F> = GeoGraph::default();
    // Node positions in degrees, for snap lookups in encounter order.
    let mut node_pos: Vec<(NodeId, f64, f64)> = Vec::new();
    let mut next_id: i64 = 0;

    let tol = options.snap_tolerance_m;
    let mut find_or_insert = |lon: f64, lat: f64, graph: &mut GeoGraph<F>| -> NodeId {
        for &(id, nlon, nlat) in &node_pos {
            if geodesic_m(nlon, nlat, lon, lat) <= tol {
                return id;
            }
        }
        let id = NodeId(next_id);
        next_id += 1;
        node_pos.push((id, lon, lat));
        graph
            .nodes
            .insert(id, GeoPoint::new(F::of(lon), F::of(lat)));
        id
    };

    for (idx, feature) in features.iter().enumerate() {
        let geometry = feature
            .get("geometry")
            .ok_or_else(|| GeoError::GeoJsonParse(format!("feature {idx} has no geometry")))?;
        if geometry.get("type").and_then(Value::as_str) != Some("LineString") {
            continue;
        }
        let class = feature_class(feature).unwrap_or_else(|| options.default_class.clone());
        if let Some(keep) = &options.keep_classes {
            if !keep.contains(&class) {
                continue;
            }
        }
        let coords = geometry
            .get("coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| {
                GeoError::GeoJsonParse(format!("feature {idx}: LineString without coordinates"))
            })?;
        if coords.len() < 2 {
            return Err(GeoError::GeoJsonParse(format!(
                "feature {idx}: LineString needs at least 2 positions, got {}",
                coords.len()
            )));
        }
        let mut line: Vec<(f64, f64)> = Vec::with_capacity(coords.len());
        for (cidx, c) in coords.iter().enumerate() {
            let pair = c.as_array().ok_or_else(|| {
                GeoError::GeoJsonParse(format!("feature {idx}: position {cidx} is not an array"))
            })?;
            if pair.len() < 2 {
                return Err(GeoError::GeoJsonParse(format!(
                    "feature {idx}: position {cidx} has fewer than 2 ordinates"
                )));
            }
            let lon = pair[0].as_f64().ok_or_else(|| {
                GeoError::GeoJsonParse(format!("feature {idx}: non-numeric longitude"))
            })?;
            let lat = pair[1].as_f64().ok_or_else(|| {
                GeoError::GeoJsonParse(format!("feature {idx}: non-numeric latitude"))
            })?;
            check_lonlat(lon, lat)?;
            line.push((lon, lat));
        }
        let u = find_or_insert(line[0].0, line[0].1, &mut graph);
        let last = *line.last().unwrap();
        let v = find_or_insert(last.0, last.1, &mut graph);
        let mut geometry_pts: Vec<GeoPoint<F>> =
            line.iter().map(|&(lo, la)| GeoPoint::new(F::of(lo), F::of(la))).collect();
        // Snapped endpoints take the canonical node position so edge
        // geometry always begins and ends exactly on its nodes.
        geometry_pts[0] = graph.nodes[&u];
        *geometry_pts.last_mut().unwrap() = graph.nodes[&v];
        graph.edges.push(GeoEdge {
            u,
            v,
            class,
            geometry: geometry_pts,
        });
    }

    if graph.edges.is_empty() {
        return Err(GeoError::EmptyGraph("no usable LineString features"));
    }
    Ok(graph)
}

/// Parses a GeoJSON collection of Point features (activity points,
/// centroids). Point order follows feature order.
pub fn parse_point_collection<F: Scalar>(raw: &str) -> Result<Vec<GeoPoint<F>>, GeoError> {
    let doc: Value =
        serde_json::from_str(raw).map_err(|e| GeoError::GeoJsonParse(e.to_string()))?;
    let features = collection_features(&doc)?;
    let mut points = Vec::new();
    for (idx, feature) in features.iter().enumerate() {
        let Some(geometry) = feature.get("geometry") else {
            continue;
        };
        if geometry.get("type").and_then(Value::as_str) != Some("Point") {
            continue;
        }
        let coords = geometry
            .get("coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| {
                GeoError::GeoJsonParse(format!("feature {idx}: Point without coordinates"))
            })?;
        if coords.len() < 2 {
            return Err(GeoError::GeoJsonParse(format!(
                "feature {idx}: Point has fewer than 2 ordinates"
            )));
        }
        let lon = coords[0]
            .as_f64()
            .ok_or_else(|| GeoError::GeoJsonParse(format!("feature {idx}: non-numeric longitude")))?;
        let lat = coords[1]
            .as_f64()
            .ok_or_else(|| GeoError::GeoJsonParse(format!("feature {idx}: non-numeric latitude")))?;
        check_lonlat(lon, lat)?;
        points.push(GeoPoint::new(F::of(lon), F::of(lat)));
    }
    Ok(points)
}

fn collection_features(doc: &Value) -> Result<&Vec<Value>, GeoError> {
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(GeoError::GeoJsonParse(
            "expected a FeatureCollection".to_string(),
        ));
    }
    doc.get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| GeoError::GeoJsonParse("FeatureCollection without features".to_string()))
}

fn feature_class(feature: &Value) -> Option<RoadClass> {
    let props = feature.get("properties")?;
    for key in ["road_class", "highway"] {
        if let Some(v) = props.get(key).and_then(Value::as_str) {
            return Some(RoadClass::new(v));
        }
    }
    None
}

fn check_lonlat(lon: f64, lat: f64) -> Result<(), GeoError> {
    if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
        return Err(GeoError::InvalidCoordinate(format!(
            "({lon}, {lat}) outside [-180, 180] x [-90, 90]"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_feature(coords: &[(f64, f64)], class: Option<&str>) -> String {
        let coord_json: Vec<String> = coords.iter().map(|(lo, la)| format!("[{lo},{la}]")).collect();
        let props = match class {
            Some(c) => format!("{{\"road_class\":\"{c}\"}}"),
            None => "{}".to_string(),
        };
        format!(
            "{{\"type\":\"Feature\",\"properties\":{props},\"geometry\":{{\"type\":\"LineString\",\"coordinates\":[{}]}}}}",
            coord_json.join(",")
        )
    }

    fn collection(features: &[String]) -> String {
        format!(
            "{{\"type\":\"FeatureCollection\",\"features\":[{}]}}",
            features.join(",")
        )
    }

    #[test]
    fn one_linestring_two_nodes_one_edge() {
        let raw = collection(&[line_feature(&[(10.0, 45.0), (10.001, 45.0)], None)]);
        let g: GeoGraph<f64> = parse_geojson(&raw, &GeoJsonOptions::default()).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].geometry.len(), 2);
    }

    #[test]
    fn distant_endpoints_stay_disconnected() {
        // Endpoints ~10 m apart must not snap at the 0.5 m default.
        let raw = collection(&[
            line_feature(&[(10.0, 45.0), (10.001, 45.0)], None),
            line_feature(&[(10.001, 45.00009), (10.002, 45.0)], None),
        ]);
        let g: GeoGraph<f64> = parse_geojson(&raw, &GeoJsonOptions::default()).unwrap();
        assert_eq!(g.nodes.len(), 4);
        assert_eq!(g.edges.len(), 2);
    }

    #[test]
    fn close_endpoints_snap_to_one_node() {
        // ~0.08 m apart: merge.
        let raw = collection(&[
            line_feature(&[(10.0, 45.0), (10.001, 45.0)], None),
            line_feature(&[(10.001, 45.0000007), (10.002, 45.0)], None),
        ]);
        let g: GeoGraph<f64> = parse_geojson(&raw, &GeoJsonOptions::default()).unwrap();
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.edges.len(), 2);
        // Shared node carries one canonical coordinate and both edge
        // geometries end exactly on it.
        let shared = NodeId(1);
        assert_eq!(*g.edges[0].geometry.last().unwrap(), g.nodes[&shared]);
        assert_eq!(g.edges[1].geometry[0], g.nodes[&shared]);
    }

    #[test]
    fn interior_vertices_are_geometry_not_nodes() {
        let raw = collection(&[line_feature(
            &[(10.0, 45.0), (10.0005, 45.0003), (10.001, 45.0)],
            None,
        )]);
        let g: GeoGraph<f64> = parse_geojson(&raw, &GeoJsonOptions::default()).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].geometry.len(), 3);
    }

    #[test]
    fn class_filter_drops_features() {
        let mut opts = GeoJsonOptions::default();
        opts.keep_classes = Some(
            [RoadClass::new("residential")]
                .into_iter()
                .collect::<BTreeSet<_>>(),
        );
        let raw = collection(&[
            line_feature(&[(10.0, 45.0), (10.001, 45.0)], Some("residential")),
            line_feature(&[(10.0, 45.001), (10.001, 45.001)], Some("footway")),
        ]);
        let g: GeoGraph<f64> = parse_geojson(&raw, &opts).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].class, RoadClass::new("residential"));
    }

    #[test]
    fn malformed_document_is_an_error() {
        let err = parse_geojson::<f64>("{\"type\":\"Feature\"}", &GeoJsonOptions::default());
        assert!(matches!(err, Err(GeoError::GeoJsonParse(_))));
    }

    #[test]
    fn point_collection_roundtrip() {
        let raw = "{\"type\":\"FeatureCollection\",\"features\":[{\"type\":\"Feature\",\"properties\":{},\"geometry\":{\"type\":\"Point\",\"coordinates\":[10.5,45.25]}}]}";
        let pts: Vec<GeoPoint<f64>> = parse_point_collection(raw).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!((pts[0].lon, pts[0].lat), (10.5, 45.25));
    }
}
