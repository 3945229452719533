//! Hand-emitted SVG figures: the street/feeder overlay and the per-scenario
//! voltage profile.

use super::ExportError;
use crate::geograph::{GeoGraph, GeoPoint, NodeId};
use crate::powerflow::PowerFlowResult;
use crate::scalar::Scalar;
use crate::synth::FeederGraph;
use std::collections::BTreeMap;
use std::fmt::Write;

const PALETTE: [&str; 6] = [
    "#1a73e8", "#d93025", "#188038", "#f29900", "#9334e6", "#007b83",
];

fn planar_f64<F: Scalar>(p: &GeoPoint<F>, node: NodeId) -> Result<(f64, f64), ExportError> {
    let (x, y) = p.planar().map_err(|_| ExportError::Unprojected(node))?;
    Ok((x.as_f64(), y.as_f64()))
}

/// Street layer in a muted stroke with the feeder highlighted on top and
/// the source marked. The viewBox fits all geometry with a 5% margin; the
/// planar frame is drawn y-up.
pub fn render_overlay_svg<F: Scalar>(
    street: &GeoGraph<F>,
    feeder: &FeederGraph<F>,
) -> Result<String, ExportError> {
    if feeder.edges.is_empty() {
        return Err(ExportError::EmptyFeeder);
    }
    // Planar polylines for both layers, in deterministic edge order.
    let mut street_lines: Vec<Vec<(f64, f64)>> = Vec::with_capacity(street.edges.len());
    for edge in &street.edges {
        let mut pts = Vec::with_capacity(edge.geometry.len());
        for p in &edge.geometry {
            pts.push(planar_f64(p, edge.u)?);
        }
        street_lines.push(pts);
    }
    let mut feeder_lines: Vec<Vec<(f64, f64)>> = Vec::with_capacity(feeder.edges.len());
    for edge in &feeder.edges {
        let mut pts = Vec::with_capacity(edge.geometry.len());
        for p in &edge.geometry {
            pts.push(planar_f64(p, edge.u)?);
        }
        feeder_lines.push(pts);
    }
    let source_pt = feeder
        .nodes
        .get(&feeder.root)
        .ok_or(ExportError::MissingCoordinates(feeder.root))?;
    let source = planar_f64(source_pt, feeder.root)?;

    let all = street_lines
        .iter()
        .chain(feeder_lines.iter())
        .flatten()
        .chain(std::iter::once(&source));
    let mut min_x = f64::INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for &(x, y) in all {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    let span_x = (max_x - min_x).max(1.0);
    let span_y = (max_y - min_y).max(1.0);
    let margin = 0.05 * span_x.max(span_y);
    let width = span_x + 2.0 * margin;
    let height = span_y + 2.0 * margin;
    // y-up planar frame to y-down SVG.
    let tx = |x: f64| x - min_x + margin;
    let ty = |y: f64| max_y - y + margin;
    let path_of = |pts: &[(f64, f64)]| {
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2} {:.2}", tx(x), ty(y));
        }
        d
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.2} {height:.2}\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");
    svg.push_str("<g fill=\"none\" stroke=\"#c4c9ce\" stroke-width=\"1.2\" stroke-linecap=\"round\">\n");
    for pts in &street_lines {
        let _ = writeln!(svg, "<path d=\"{}\"/>", path_of(pts));
    }
    svg.push_str("</g>\n");
    svg.push_str("<g fill=\"none\" stroke=\"#d93025\" stroke-width=\"3\" stroke-linecap=\"round\" class=\"feeder\">\n");
    for pts in &feeder_lines {
        let _ = writeln!(svg, "<path d=\"{}\"/>", path_of(pts));
    }
    svg.push_str("</g>\n");
    let _ = writeln!(
        svg,
        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"#1a73e8\" stroke=\"#ffffff\" stroke-width=\"1.5\"/>",
        tx(source.0),
        ty(source.1),
        0.012 * span_x.max(span_y),
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// One polyline per converged scenario over buses sorted by (depth, id),
/// with reference lines at 1.0 pu and the voltage floor.
pub fn render_voltage_profile_svg<F: Scalar>(
    feeder: &FeederGraph<F>,
    results: &BTreeMap<String, PowerFlowResult<F>>,
    v_min: F,
) -> Result<String, ExportError> {
    let converged: Vec<(&String, &PowerFlowResult<F>)> = results
        .iter()
        .filter(|(_, r)| r.converged)
        .collect();
    if converged.is_empty() {
        return Err(ExportError::NoConvergedResults);
    }
    let mut buses: Vec<NodeId> = feeder.depth.keys().copied().collect();
    buses.sort_by_key(|id| (feeder.depth[id], *id));

    let v_min = v_min.as_f64();
    let mut lo = v_min.min(1.0);
    let mut hi = 1.0f64;
    for (_, r) in &converged {
        for &v in r.v_pu.values() {
            lo = lo.min(v.as_f64());
            hi = hi.max(v.as_f64());
        }
    }
    let pad = 0.1 * (hi - lo).max(0.01);
    lo -= pad;
    hi += pad;

    let (w, h) = (720.0, 420.0);
    let (ml, mr, mt, mb) = (60.0, 160.0, 20.0, 40.0);
    let plot_w = w - ml - mr;
    let plot_h = h - mt - mb;
    let n = buses.len();
    let sx = |i: usize| {
        if n <= 1 {
            ml + plot_w / 2.0
        } else {
            ml + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let sy = |v: f64| mt + plot_h * (hi - v) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");
    // Axes frame.
    let _ = writeln!(
        svg,
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#444444\"/>"
    );
    // Reference lines with labels.
    for (v, label) in [(1.0, "1.0 pu"), (v_min, "V_min")] {
        if v < lo || v > hi {
            continue;
        }
        let y = sy(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{ml}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#999999\" stroke-dasharray=\"5 4\"/>",
            ml + plot_w
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#555555\">{label}</text>",
            6.0,
            y + 4.0
        );
    }
    // Scenario polylines, BTreeMap order, palette cycling.
    for (k, (name, result)) in converged.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for (i, bus) in buses.iter().enumerate() {
            if let Some(&v) = result.v_pu.get(bus) {
                let _ = write!(points, "{:.2},{:.2} ", sx(i), sy(v.as_f64()));
            }
        }
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            points.trim_end()
        );
        let ly = mt + 18.0 * k as f64 + 10.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            w - mr + 10.0,
            w - mr + 34.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{ly:.2}\" dy=\"4\" fill=\"#333333\">{name}</text>",
            w - mr + 40.0
        );
    }
    // Axis labels.
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#333333\">bus (by depth)</text>",
        ml + plot_w / 2.0 - 40.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#333333\" transform=\"rotate(-90 14 {:.0})\">V (pu)</text>",
        14.0,
        mt + plot_h / 2.0,
        mt + plot_h / 2.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}
