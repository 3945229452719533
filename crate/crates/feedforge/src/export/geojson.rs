//! GeoJSON emitter: one Point feature per bus, one LineString per line,
//! re-ingestible by the street parser.

use super::ExportError;
use crate::electrify::ElectricalNetwork;
use crate::geograph::NodeId;
use crate::scalar::Scalar;
use crate::synth::FeederGraph;
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// Emits a FeatureCollection over the feeder geometry with electrical
/// properties attached: per-bus load and depth, per-line road class.
pub fn to_geojson<F: Scalar>(
    feeder: &FeederGraph<F>,
    net: &ElectricalNetwork<F>,
) -> Result<String, ExportError> {
    let mut load_at: BTreeMap<NodeId, (F, u32)> = BTreeMap::new();
    for load in &net.loads {
        let entry = load_at.entry(load.bus).or_insert((F::zero(), 0));
        entry.0 += load.p_mw;
        entry.1 += load.households;
    }

    let mut features: Vec<Value> = Vec::new();
    for bus in &net.buses {
        let point = feeder
            .nodes
            .get(&bus.id)
            .ok_or(ExportError::MissingCoordinates(bus.id))?;
        let (lon, lat) = (point.lon.as_f64(), point.lat.as_f64());
        if !lon.is_finite() || !lat.is_finite() {
            return Err(ExportError::MissingCoordinates(bus.id));
        }
        let (p_mw, households) = load_at
            .get(&bus.id)
            .map(|&(p, h)| (p.as_f64(), h))
            .unwrap_or((0.0, 0));
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [lon, lat]},
            "properties": {
                "id": bus.id.0,
                "depth": feeder.depth.get(&bus.id).copied().unwrap_or(0),
                "is_source": bus.id == net.slack_bus,
                "load_mw": p_mw,
                "households": households,
            },
        }));
    }
    for edge in &feeder.edges {
        let coords: Vec<Value> = edge
            .geometry
            .iter()
            .map(|p| json!([p.lon.as_f64(), p.lat.as_f64()]))
            .collect();
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": {
                "road_class": edge.class.as_str(),
                "from": edge.u.0,
                "to": edge.v.0,
                "length_m": edge.length_m.as_f64(),
            },
        }));
    }
    let doc = json!({"type": "FeatureCollection", "features": features});
    let mut out = serde_json::to_string_pretty(&doc).map_err(|e| ExportError::Json(e.to_string()))?;
    out.push('\n');
    Ok(out)
}
