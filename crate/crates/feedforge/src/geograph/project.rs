use super::{GeoError, GeoGraph, GeoPoint};
use crate::scalar::Scalar;

/// IUGG mean earth radius.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Maximum longitude/latitude span the local planar frame accepts.
pub const MAX_SPAN_DEG: f64 = 2.0;

/// Azimuthal equidistant projection about a fixed centre. All parties in a
/// pipeline run share one instance so activity points, centroids and graph
/// geometry land in the same planar frame.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Projection<F> {
    pub lon0: F,
    pub lat0: F,
}

impl<F: Scalar> Projection<F> {
    /// Fits the projection to the graph centroid, refusing inputs that span
    /// more than [`MAX_SPAN_DEG`] degrees in either axis.
    pub fn fit(graph: &GeoGraph<F>) -> Result<Self, GeoError> {
        if graph.nodes.is_empty() {
            return Err(GeoError::EmptyGraph("cannot project an empty graph"));
        }
        let mut lon_min = F::infinity();
        let mut lon_max = F::neg_infinity();
        let mut lat_min = F::infinity();
        let mut lat_max = F::neg_infinity();
        let mut visit = |p: &GeoPoint<F>| {
            lon_min = lon_min.min(p.lon);
            lon_max = lon_max.max(p.lon);
            lat_min = lat_min.min(p.lat);
            lat_max = lat_max.max(p.lat);
        };
        for p in graph.nodes.values() {
            visit(p);
        }
        for e in &graph.edges {
            for p in &e.geometry {
                visit(p);
            }
        }
        let lon_span = (lon_max - lon_min).as_f64();
        let lat_span = (lat_max - lat_min).as_f64();
        if lon_span > MAX_SPAN_DEG {
            return Err(GeoError::SpanTooLarge {
                axis: "longitude",
                span_deg: lon_span,
                limit: MAX_SPAN_DEG,
            });
        }
        if lat_span > MAX_SPAN_DEG {
            return Err(GeoError::SpanTooLarge {
                axis: "latitude",
                span_deg: lat_span,
                limit: MAX_SPAN_DEG,
            });
        }
        let (lon0, lat0) = graph.centroid()?;
        Ok(Projection { lon0, lat0 })
    }

    /// Projects one lon/lat pair to planar metres.
    pub fn to_plane(&self, lon: F, lat: F) -> (F, F) {
        let r = F::of(EARTH_RADIUS_M);
        let phi = lat.to_radians();
        let phi0 = self.lat0.to_radians();
        let dlam = (lon - self.lon0).to_radians();
        let (sin_phi, cos_phi) = phi.sin_cos();
        let (sin_phi0, cos_phi0) = phi0.sin_cos();
        let cos_c = (sin_phi0 * sin_phi + cos_phi0 * cos_phi * dlam.cos())
            .max(-F::one())
            .min(F::one());
        let c = cos_c.acos();
        // c / sin(c), continuous through the origin
        let k = if c < F::of(1e-12) {
            F::one()
        } else {
            c / c.sin()
        };
        let x = r * k * cos_phi * dlam.sin();
        let y = r * k * (cos_phi0 * sin_phi - sin_phi0 * cos_phi * dlam.cos());
        (x, y)
    }

    pub fn project_point(&self, p: &mut GeoPoint<F>) {
        let (x, y) = self.to_plane(p.lon, p.lat);
        p.x = Some(x);
        p.y = Some(y);
    }
}

/// Projects every node and geometry point in place, returning the fitted
/// projection so later stages can reuse the same frame.
pub fn project<F: Scalar>(graph: &mut GeoGraph<F>) -> Result<Projection<F>, GeoError> {
    let proj = Projection::fit(graph)?;
    for p in graph.nodes.values_mut() {
        proj.project_point(p);
    }
    for e in graph.edges.iter_mut() {
        for p in e.geometry.iter_mut() {
            proj.project_point(p);
        }
    }
    Ok(proj)
}

/// Great-circle distance in metres on the mean sphere (haversine).
pub fn geodesic_m<F: Scalar>(lon1: F, lat1: F, lon2: F, lat2: F) -> F {
    let r = F::of(EARTH_RADIUS_M);
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dphi = (lat2 - lat1).to_radians();
    let dlam = (lon2 - lon1).to_radians();
    let two = F::of(2.0);
    let a = (dphi / two).sin().powi(2) + phi1.cos() * phi2.cos() * (dlam / two).sin().powi(2);
    two * r * a.sqrt().min(F::one()).asin()
}
