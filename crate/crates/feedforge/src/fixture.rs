//! Deterministic demo inputs. The files under `fixtures/` at the
//! repository root are exactly what these generators produce; the
//! sync-guard test fails if they drift, and regenerates them when
//! `REGEN_FIXTURES` is set.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::PathBuf;

const M_PER_DEG_LAT: f64 = 111_320.0;

/// grid15: a 15 by 15 street grid at 80 m spacing with a tertiary cross
/// through the middle, 360 clustered activity points, and a config that
/// picks the source by coordinate and the required nodes by activity.
pub const GRID15: &str = "grid15";
/// demo10: a ten-node OSM extract with explicit source and required ids.
pub const DEMO10: &str = "demo10";

const GRID_N: usize = 15;
const GRID_SPACING_M: f64 = 80.0;
const GRID_LAT0: f64 = 40.0;
const GRID_LON0: f64 = -75.2;

fn grid_lonlat(row: usize, col: usize) -> (f64, f64) {
    let dlat = GRID_SPACING_M / M_PER_DEG_LAT;
    let dlon = GRID_SPACING_M / (M_PER_DEG_LAT * GRID_LAT0.to_radians().cos());
    let center = (GRID_N as f64 - 1.0) / 2.0;
    (
        GRID_LON0 + (col as f64 - center) * dlon,
        GRID_LAT0 + (row as f64 - center) * dlat,
    )
}

fn line_feature(a: (f64, f64), b: (f64, f64), class: &str) -> serde_json::Value {
    json!({
        "type": "Feature",
        "properties": {"highway": class},
        "geometry": {
            "type": "LineString",
            "coordinates": [[a.0, a.1], [b.0, b.1]],
        },
    })
}

/// The grid street network as a GeoJSON FeatureCollection, one two-point
/// LineString per block face.
pub fn grid15_street_geojson() -> String {
    let mid = GRID_N / 2;
    let mut features = Vec::new();
    for row in 0..GRID_N {
        for col in 0..GRID_N - 1 {
            let class = if row == mid { "tertiary" } else { "residential" };
            features.push(line_feature(
                grid_lonlat(row, col),
                grid_lonlat(row, col + 1),
                class,
            ));
        }
    }
    for col in 0..GRID_N {
        for row in 0..GRID_N - 1 {
            let class = if col == mid { "tertiary" } else { "residential" };
            features.push(line_feature(
                grid_lonlat(row, col),
                grid_lonlat(row + 1, col),
                class,
            ));
        }
    }
    let doc = json!({"type": "FeatureCollection", "features": features});
    let mut out = serde_json::to_string_pretty(&doc).expect("fixture json");
    out.push('\n');
    out
}

/// 360 activity points: 60 per cluster, uniform in a 55 m disc around six
/// grid nodes, seeded so the file is reproducible.
pub fn grid15_activity_geojson() -> String {
    let clusters: [(usize, usize); 6] = [(2, 2), (2, 11), (6, 4), (9, 10), (12, 3), (12, 12)];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let dlat = 1.0 / M_PER_DEG_LAT;
    let dlon = 1.0 / (M_PER_DEG_LAT * GRID_LAT0.to_radians().cos());
    let mut features = Vec::new();
    for &(row, col) in &clusters {
        let (clon, clat) = grid_lonlat(row, col);
        for _ in 0..60 {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            let r = 55.0 * u.sqrt();
            let theta = 2.0 * std::f64::consts::PI * v;
            let lon = clon + r * theta.cos() * dlon;
            let lat = clat + r * theta.sin() * dlat;
            features.push(json!({
                "type": "Feature",
                "properties": {},
                "geometry": {"type": "Point", "coordinates": [lon, lat]},
            }));
        }
    }
    let doc = json!({"type": "FeatureCollection", "features": features});
    let mut out = serde_json::to_string_pretty(&doc).expect("fixture json");
    out.push('\n');
    out
}

pub fn grid15_config_toml() -> String {
    let (lon_c, lat_c) = grid_lonlat(GRID_N / 2, GRID_N / 2);
    let dlat = 1.0 / M_PER_DEG_LAT;
    let dlon = 1.0 / (M_PER_DEG_LAT * GRID_LAT0.to_radians().cos());
    // Demand centroid a little off the central junction so no distance in
    // the allocation weight degenerates to zero.
    let cen_lon = lon_c + 32.0 * dlon;
    let cen_lat = lat_c + 24.0 * dlat;
    format!(
        r#"seed = 42

[input]
path = "street.geojson"
format = "geojson"
activity_path = "activity.geojson"

[synthesis]
solver = "exact"
timeout_s = 55.0

[synthesis.source]
coord = [{lon_c}, {lat_c}]

[synthesis.required]
top_k = 10

[electrify]
households = 360

[electrify.allocation]
total_p_mw = 1.44
beta = 1.0
centroids = [[{cen_lon}, {cen_lat}]]

[powerflow]
v_min = 0.95
"#
    )
}

const DEMO_LAT0: f64 = 52.52;
const DEMO_LON0: f64 = 13.40;

fn demo_lonlat(south: usize, east: usize) -> (f64, f64) {
    let dlat = 90.0 / M_PER_DEG_LAT;
    let dlon = 90.0 / (M_PER_DEG_LAT * DEMO_LAT0.to_radians().cos());
    (DEMO_LON0 + east as f64 * dlon, DEMO_LAT0 - south as f64 * dlat)
}

/// Ten OSM nodes: a tertiary main street 1-2-3-4-5 with residential
/// branches 3-6-7 and 4-8-9-10. The 3-6-7 branch is mapped as two ways so
/// node 6 is a real graph node; it has degree 2, which makes it exercise
/// the protected-node path through simplification when it is required.
pub fn demo10_street_osm() -> String {
    let positions: [(i64, usize, usize); 10] = [
        (1, 0, 0),
        (2, 0, 1),
        (3, 0, 2),
        (4, 0, 3),
        (5, 0, 4),
        (6, 1, 2),
        (7, 2, 2),
        (8, 1, 3),
        (9, 2, 3),
        (10, 3, 3),
    ];
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n");
    for &(id, south, east) in &positions {
        let (lon, lat) = demo_lonlat(south, east);
        out.push_str(&format!(
            "  <node id=\"{id}\" lat=\"{lat:.7}\" lon=\"{lon:.7}\"/>\n"
        ));
    }
    let ways: [(i64, &[i64], &str); 4] = [
        (100, &[1, 2, 3, 4, 5], "tertiary"),
        (101, &[3, 6], "residential"),
        (102, &[6, 7], "residential"),
        (103, &[4, 8, 9, 10], "residential"),
    ];
    for &(id, refs, class) in &ways {
        out.push_str(&format!("  <way id=\"{id}\">\n"));
        for r in refs {
            out.push_str(&format!("    <nd ref=\"{r}\"/>\n"));
        }
        out.push_str(&format!("    <tag k=\"highway\" v=\"{class}\"/>\n"));
        out.push_str("  </way>\n");
    }
    out.push_str("</osm>\n");
    out
}

pub fn demo10_config_toml() -> String {
    r#"seed = 7

[input]
path = "street.osm"
format = "osm-xml"

[synthesis]
solver = "heuristic"

[synthesis.source]
node = 1

[synthesis.required]
nodes = [6, 10]

[electrify]
households = 24

[electrify.allocation]
total_p_mw = 0.18
power_factor = 0.9
"#
    .to_string()
}

/// Relative path → content for every checked-in fixture file.
pub fn all_files() -> Vec<(PathBuf, String)> {
    vec![
        (
            PathBuf::from(GRID15).join("street.geojson"),
            grid15_street_geojson(),
        ),
        (
            PathBuf::from(GRID15).join("activity.geojson"),
            grid15_activity_geojson(),
        ),
        (
            PathBuf::from(GRID15).join("grid15.toml"),
            grid15_config_toml(),
        ),
        (
            PathBuf::from(DEMO10).join("street.osm"),
            demo10_street_osm(),
        ),
        (
            PathBuf::from(DEMO10).join("demo10.toml"),
            demo10_config_toml(),
        ),
    ]
}

/// The repository's fixtures directory.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("fixtures")
}

pub fn config_path(name: &str) -> PathBuf {
    fixtures_dir().join(name).join(format!("{name}.toml"))
}
