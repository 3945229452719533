use super::{GeoError, GeoGraph, GeoEdge, GeoPoint, NodeId, RoadClass};
use crate::scalar::Scalar;
use quick_xml::events::Event;
use quick_xml::Reader;
use std::collections::{BTreeMap, BTreeSet};

/// Options for OSM XML ingestion.
#[derive(Debug, Clone, Default)]
pub struct OsmOptions {
    /// Road classes (highway tag values) to keep; `None` keeps all highway
    /// ways. Ways without a highway tag never become edges.
    pub keep_classes: Option<BTreeSet<RoadClass>>,
}

struct RawWay {
    refs: Vec<i64>,
    highway: Option<String>,
}

/// Parses OSM XML into a street graph. Way endpoints and nodes shared by
/// more than one retained way become graph nodes; every stretch between such
/// nodes becomes one edge with the intermediate points as geometry.
pub fn parse_osm_xml<F: Scalar>(raw: &str, options: &OsmOptions) -> Result<GeoGraph<F>, GeoError> {
    let mut reader = Reader::from_str(raw);
    let mut node_pos: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    let mut ways: Vec<RawWay> = Vec::new();
    let mut current: Option<RawWay> = None;

    loop {
        let event = reader
            .read_event()
            .map_err(|e| xml_error(raw, reader.buffer_position() as usize, e.to_string()))?;
        match event {
            Event::Start(e) | Event::Empty(e) => {
                let pos = reader.buffer_position() as usize;
                match e.name().as_ref() {
                    b"node" => {
                        let mut id = None;
                        let mut lon = None;
                        let mut lat = None;
                        for attr in e.attributes() {
                            let attr =
                                attr.map_err(|er| xml_error(raw, pos, er.to_string()))?;
                            let value = attr
                                .unescape_value()
                                .map_err(|er| xml_error(raw, pos, er.to_string()))?;
                            match attr.key.as_ref() {
                                b"id" => id = value.parse::<i64>().ok(),
                                b"lon" => lon = value.parse::<f64>().ok(),
                                b"lat" => lat = value.parse::<f64>().ok(),
                                _ => {}
                            }
                        }
                        match (id, lon, lat) {
                            (Some(id), Some(lon), Some(lat)) => {
                                node_pos.insert(id, (lon, lat));
                            }
                            _ => {
                                return Err(xml_error(
                                    raw,
                                    pos,
                                    "node element missing id/lon/lat".to_string(),
                                ))
                            }
                        }
                    }
                    b"way" => {
                        current = Some(RawWay {
                            refs: Vec::new(),
                            highway: None,
                        });
                    }
                    b"nd" => {
                        if let Some(way) = current.as_mut() {
                            for attr in e.attributes() {
                                let attr =
                                    attr.map_err(|er| xml_error(raw, pos, er.to_string()))?;
                                if attr.key.as_ref() == b"ref" {
                                    let value = attr
                                        .unescape_value()
                                        .map_err(|er| xml_error(raw, pos, er.to_string()))?;
                                    let r = value.parse::<i64>().map_err(|_| {
                                        xml_error(raw, pos, format!("bad nd ref '{value}'"))
                                    })?;
                                    way.refs.push(r);
                                }
                            }
                        }
                    }
                    b"tag" => {
                        if let Some(way) = current.as_mut() {
                            let mut k = None;
                            let mut v = None;
                            for attr in e.attributes() {
                                let attr =
                                    attr.map_err(|er| xml_error(raw, pos, er.to_string()))?;
                                let value = attr
                                    .unescape_value()
                                    .map_err(|er| xml_error(raw, pos, er.to_string()))?
                                    .into_owned();
                                match attr.key.as_ref() {
                                    b"k" => k = Some(value),
                                    b"v" => v = Some(value),
                                    _ => {}
                                }
                            }
                            if k.as_deref() == Some("highway") {
                                way.highway = v;
                            }
                        }
                    }
                    _ => {}
                }
            }
            Event::End(e) => {
                if e.name().as_ref() == b"way" {
                    if let Some(way) = current.take() {
                        ways.push(way);
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }

    // Retain highway ways that pass the class filter.
    let mut retained: Vec<(Vec<i64>, RoadClass)> = Vec::new();
    for way in ways {
        let Some(hw) = way.highway else { continue };
        let class = RoadClass::new(hw);
        if let Some(keep) = &options.keep_classes {
            if !keep.contains(&class) {
                continue;
            }
        }
        if way.refs.len() >= 2 {
            retained.push((way.refs, class));
        }
    }
    if retained.is_empty() {
        return Err(GeoError::EmptyGraph("no usable highway ways"));
    }

    // A node referenced twice across (or within) retained ways is an
    // intersection; way endpoints are always graph nodes.
    let mut usage: BTreeMap<i64, u32> = BTreeMap::new();
    for (refs, _) in &retained {
        for &r in refs {
            *usage.entry(r).or_insert(0) += 1;
        }
    }
    let mut anchors: BTreeSet<i64> = usage
        .iter()
        .filter(|(_, &c)| c >= 2)
        .map(|(&r, _)| r)
        .collect();
    for (refs, _) in &retained {
        anchors.insert(refs[0]);
        anchors.insert(*refs.last().unwrap());
    }

    let mut graph: GeoGraph<F> = GeoGraph::default();
    let lookup = |id: i64| -> Result<GeoPoint<F>, GeoError> {
        let (lon, lat) = node_pos
            .get(&id)
            .copied()
            .ok_or_else(|| GeoError::OsmData(format!("way references missing node {id}")))?;
        Ok(GeoPoint::new(F::of(lon), F::of(lat)))
    };

    for (refs, class) in &retained {
        let mut segment: Vec<i64> = vec![refs[0]];
        for &r in &refs[1..] {
            if r == *segment.last().unwrap() {
                continue; // repeated consecutive ref
            }
            segment.push(r);
            if anchors.contains(&r) {
                let u = NodeId(segment[0]);
                let v = NodeId(r);
                let geometry = segment
                    .iter()
                    .map(|&id| lookup(id))
                    .collect::<Result<Vec<_>, _>>()?;
                graph.nodes.insert(u, geometry[0]);
                graph.nodes.insert(v, *geometry.last().unwrap());
                graph.edges.push(GeoEdge {
                    u,
                    v,
                    class: class.clone(),
                    geometry,
                });
                segment = vec![r];
            }
        }
    }

    if graph.edges.is_empty() {
        return Err(GeoError::EmptyGraph("no usable highway ways"));
    }
    Ok(graph)
}

fn xml_error(raw: &str, byte_pos: usize, message: String) -> GeoError {
    let pos = byte_pos.min(raw.len());
    let line = raw[..pos].bytes().filter(|&b| b == b'\n').count() + 1;
    let column = pos - raw[..pos].rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    GeoError::XmlParse {
        line,
        column,
        message,
    }
}
