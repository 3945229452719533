//! Street-network ingestion: parsing, projection, cleaning, simplification
//! and edge scoring. The output of this module is a [`CandidateGraph`]
//! ready for feeder synthesis.

mod clean;
mod geojson;
mod osm;
mod project;
mod score;
mod simplify;

pub use clean::clean;
pub use geojson::{parse_geojson, parse_point_collection, GeoJsonOptions};
pub use osm::{parse_osm_xml, OsmOptions};
pub use project::{geodesic_m, project, Projection, EARTH_RADIUS_M, MAX_SPAN_DEG};
pub use score::{score_edges, ClassPenalties, ScoringConfig, ScoringWeights};
pub use simplify::simplify;

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Stable node identifier. OSM ids are used verbatim; GeoJSON ingestion
/// assigns sequential ids in encounter order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NodeId(pub i64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Road classification tag, e.g. `residential` or `tertiary`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoadClass(String);

impl RoadClass {
    pub fn new(s: impl Into<String>) -> Self {
        RoadClass(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RoadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<&str> for RoadClass {
    fn from(s: &str) -> Self {
        RoadClass::new(s)
    }
}

/// A geographic point, optionally carrying planar coordinates in the shared
/// local frame once [`project`] has run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint<F> {
    /// Longitude in degrees, [-180, 180].
    pub lon: F,
    /// Latitude in degrees, [-90, 90].
    pub lat: F,
    /// Easting in metres in the local frame.
    #[serde(default = "none_f", skip_serializing_if = "Option::is_none")]
    pub x: Option<F>,
    /// Northing in metres in the local frame.
    #[serde(default = "none_f", skip_serializing_if = "Option::is_none")]
    pub y: Option<F>,
}

fn none_f<F>() -> Option<F> {
    None
}

impl<F: Scalar> GeoPoint<F> {
    pub fn new(lon: F, lat: F) -> Self {
        GeoPoint {
            lon,
            lat,
            x: None,
            y: None,
        }
    }

    pub fn with_xy(lon: F, lat: F, x: F, y: F) -> Self {
        GeoPoint {
            lon,
            lat,
            x: Some(x),
            y: Some(y),
        }
    }

    /// Planar coordinates, or an error if the point was never projected.
    pub fn planar(&self) -> Result<(F, F), GeoError> {
        match (self.x, self.y) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(GeoError::Unprojected),
        }
    }

    /// Euclidean distance in the planar frame.
    pub fn planar_distance(&self, other: &Self) -> Result<F, GeoError> {
        let (ax, ay) = self.planar()?;
        let (bx, by) = other.planar()?;
        Ok(((ax - bx).powi(2) + (ay - by).powi(2)).sqrt())
    }
}

/// An undirected street edge with its full polyline geometry. The geometry
/// starts at `u`'s point and ends at `v`'s point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoEdge<F> {
    pub u: NodeId,
    pub v: NodeId,
    pub class: RoadClass,
    pub geometry: Vec<GeoPoint<F>>,
}

impl<F: Scalar> GeoEdge<F> {
    /// Polyline arc length in metres (projected frame).
    pub fn arc_length(&self) -> Result<F, GeoError> {
        polyline_length(&self.geometry)
    }
}

pub(crate) fn polyline_length<F: Scalar>(geometry: &[GeoPoint<F>]) -> Result<F, GeoError> {
    let mut total = F::zero();
    for pair in geometry.windows(2) {
        total = total + pair[0].planar_distance(&pair[1])?;
    }
    Ok(total)
}

/// An undirected street graph with polyline edge geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GeoGraph<F> {
    pub nodes: BTreeMap<NodeId, GeoPoint<F>>,
    pub edges: Vec<GeoEdge<F>>,
}

impl<F: Scalar> GeoGraph<F> {
    /// Number of incident edges per node; self-loops count twice.
    pub fn degrees(&self) -> BTreeMap<NodeId, usize> {
        let mut deg: BTreeMap<NodeId, usize> = self.nodes.keys().map(|&n| (n, 0)).collect();
        for e in &self.edges {
            *deg.entry(e.u).or_insert(0) += 1;
            *deg.entry(e.v).or_insert(0) += 1;
        }
        deg
    }

    /// Total arc length over all edges in metres.
    pub fn total_length(&self) -> Result<F, GeoError> {
        let mut total = F::zero();
        for e in &self.edges {
            total = total + e.arc_length()?;
        }
        Ok(total)
    }

    /// Mean node position in degrees.
    pub fn centroid(&self) -> Result<(F, F), GeoError> {
        if self.nodes.is_empty() {
            return Err(GeoError::EmptyGraph("cannot take centroid of empty graph"));
        }
        let mut lon = F::zero();
        let mut lat = F::zero();
        for p in self.nodes.values() {
            lon = lon + p.lon;
            lat = lat + p.lat;
        }
        let n = F::from_usize(self.nodes.len()).unwrap();
        Ok((lon / n, lat / n))
    }
}

/// Simplified street graph whose edges are synthesis candidates. Produced by
/// [`simplify`]; edge weights are populated by [`score_edges`].
///
/// Serialized as `{weights, nodes: [{id, lon, lat, x, y}], edges: [{u, v, d,
/// c_cls, c_bend, w, class, geometry}]}` with full float precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGraph<F> {
    /// Scoring weights used to fill `w`, recorded so that composite weights
    /// stay recomputable. `None` until [`score_edges`] runs.
    #[serde(default = "none_w", skip_serializing_if = "Option::is_none")]
    pub weights: Option<ScoringWeights<F>>,
    pub nodes: BTreeMap<NodeId, GeoPoint<F>>,
    pub edges: Vec<CandidateEdge<F>>,
}

fn none_w<F>() -> Option<ScoringWeights<F>> {
    None
}

/// A candidate edge. `d` is the polyline arc length in metres, `c_cls` the
/// road-class penalty, `c_bend` the accumulated absolute heading change in
/// radians, and `w` the composite weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEdge<F> {
    pub u: NodeId,
    pub v: NodeId,
    pub d: F,
    pub c_cls: F,
    pub c_bend: F,
    pub w: F,
    pub class: RoadClass,
    pub geometry: Vec<GeoPoint<F>>,
}

impl<F: Scalar> CandidateGraph<F> {
    pub fn degrees(&self) -> BTreeMap<NodeId, usize> {
        let mut deg: BTreeMap<NodeId, usize> = self.nodes.keys().map(|&n| (n, 0)).collect();
        for e in &self.edges {
            *deg.entry(e.u).or_insert(0) += 1;
            *deg.entry(e.v).or_insert(0) += 1;
        }
        deg
    }

    pub fn total_length(&self) -> F {
        let mut total = F::zero();
        for e in &self.edges {
            total = total + e.d;
        }
        total
    }

    /// View of the candidate graph as a street graph, used to re-run
    /// simplification and to draw overlays.
    pub fn to_geo_graph(&self) -> GeoGraph<F> {
        GeoGraph {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| GeoEdge {
                    u: e.u,
                    v: e.v,
                    class: e.class.clone(),
                    geometry: e.geometry.clone(),
                })
                .collect(),
        }
    }

    /// Checks connectivity over the node set.
    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.u).or_default().push(e.v);
            adj.entry(e.v).or_default().push(e.u);
        }
        let start = *self.nodes.keys().next().unwrap();
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(n) = stack.pop() {
            for &m in adj.get(&n).into_iter().flatten() {
                if seen.insert(m) {
                    stack.push(m);
                }
            }
        }
        seen.len() == self.nodes.len()
    }
}

/// Errors raised while building or transforming street graphs.
#[derive(Debug, thiserror::Error)]
pub enum GeoError {
    #[error("XML parse error at line {line}, column {column}: {message}")]
    XmlParse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("GeoJSON parse error: {0}")]
    GeoJsonParse(String),
    #[error("empty graph: {0}")]
    EmptyGraph(&'static str),
    #[error("graph spans {span_deg:.4} degrees of {axis}, beyond the {limit} degree limit of the local projection")]
    SpanTooLarge {
        axis: &'static str,
        span_deg: f64,
        limit: f64,
    },
    #[error("point has no planar coordinates; run project() first")]
    Unprojected,
    #[error("road class '{0}' has no penalty entry")]
    UnknownRoadClass(RoadClass),
    #[error("invalid scoring config: {0}")]
    InvalidScoring(String),
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),
    #[error("OSM data error: {0}")]
    OsmData(String),
}
