use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{CurveSegment, MarkerKind, RenderedMap};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvgConfig {
    /// Document width in millimetres; height follows the extent's aspect.
    pub canvas_width_mm: f64,
    /// Draw thick edges first so thin ones stay visible on top.
    pub thick_first: bool,
    pub stroke: String,
    pub region_fill: String,
    pub marker_radius_mm: f64,
}

impl Default for SvgConfig {
    fn default() -> Self {
        Self {
            canvas_width_mm: 200.0,
            thick_first: true,
            stroke: "#1f4e79".into(),
            region_fill: "#eeeeee".into(),
            marker_radius_mm: 0.8,
        }
    }
}

struct Canvas {
    min_x: f64,
    max_y: f64,
    scale: f64,
}

impl Canvas {
    fn map(&self, p: Point) -> (f64, f64) {
        ((p.x - self.min_x) * self.scale, (self.max_y - p.y) * self.scale)
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn pt(c: &Canvas, p: Point) -> String {
    let (x, y) = c.map(p);
    format!("{} {}", num(x), num(y))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Render the map as SVG. User units are millimetres, so edge widths are
/// written unchanged. Layer order: regions, edges, node markers.
pub fn emit_svg(map: &RenderedMap, cfg: &SvgConfig) -> String {
    let ext = map.extent;
    let scale = cfg.canvas_width_mm / ext.width();
    let canvas = Canvas { min_x: ext.min.x, max_y: ext.max.y, scale };
    let w = cfg.canvas_width_mm;
    let h = ext.height() * scale;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}mm" height="{h}mm" viewBox="0 0 {w} {h}">"#,
        w = num(w),
        h = num(h)
    );

    let _ = writeln!(out, r#"<g id="regions" fill="{}" stroke="none">"#, escape(&cfg.region_fill));
    for poly in &map.regions {
        let mut d = String::new();
        for ring in poly.rings() {
            for (i, &p) in ring.iter().enumerate() {
                let _ = write!(d, "{}{} ", if i == 0 { "M" } else { "L" }, pt(&canvas, p));
            }
            d.push_str("Z ");
        }
        let _ = writeln!(out, r#"<path fill-rule="evenodd" d="{}"/>"#, d.trim_end());
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r#"<g id="edges" fill="none" stroke="{}" stroke-linecap="round" stroke-linejoin="round">"#,
        escape(&cfg.stroke)
    );
    let ordered: Vec<_> = if cfg.thick_first {
        map.edges.iter().collect()
    } else {
        map.edges.iter().rev().collect()
    };
    for e in ordered {
        let mut d = format!("M{}", pt(&canvas, e.curve.start));
        for seg in &e.curve.segments {
            match *seg {
                CurveSegment::Line { to } => {
                    let _ = write!(d, " L{}", pt(&canvas, to));
                }
                CurveSegment::Quad { ctrl, to } => {
                    let _ = write!(d, " Q{} {}", pt(&canvas, ctrl), pt(&canvas, to));
                }
            }
        }
        let kind = match e.geometry.kind {
            super::EdgeKind::HangEdge => "hang",
            super::EdgeKind::NonHangEdge => "trunk",
        };
        let _ = writeln!(
            out,
            r#"<path class="{kind}" data-volume="{}" stroke-width="{}" d="{d}"/>"#,
            num(e.geometry.volume),
            num(e.geometry.width)
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g id="nodes" stroke="#ffffff" stroke-width="0.200000">"##);
    for m in &map.markers {
        let (x, y) = canvas.map(m.position);
        let (class, fill, r) = match m.kind {
            MarkerKind::Origin => ("origin", "#c0392b", cfg.marker_radius_mm * 1.5),
            MarkerKind::Destination => ("destination", "#333333", cfg.marker_radius_mm),
        };
        let _ = writeln!(
            out,
            r#"<circle class="{class}" data-id="{}" cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            escape(&m.id),
            num(x),
            num(y),
            num(r)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
