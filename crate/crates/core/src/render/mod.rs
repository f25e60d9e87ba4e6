//! Flow accumulation, edge decomposition, widths and map output.

mod smooth;
mod svg;

pub use smooth::{collapse_collinear, quad_point, smooth, CurveSegment, SmoothCurve};
pub use svg::{emit_svg, SvgConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, Rect};
use crate::grid::{Cell, CellRole, GridSpace, NodeSet};
use crate::layout::FlowNetwork;

/// Per-cell volume draining through each committed cell. Uncommitted cells
/// carry zero; the origin carries the total.
pub fn accumulate(gs: &GridSpace, net: &FlowNetwork, nodes: &NodeSet) -> Vec<f64> {
    let n = gs.len();
    let mut acc = vec![0.0; n];
    let mut pending: Vec<usize> = vec![0; n];
    for cell in net.committed_cells() {
        pending[gs.index(cell)] = net.upstream_count(cell);
        if let CellRole::Destination(d) = gs.info(cell).role {
            if net.path(d).is_some() {
                acc[gs.index(cell)] += nodes.destinations[d].volume;
            }
        }
    }
    // Leaves first; a cell is released once all its upstream cells are done.
    let mut stack: Vec<Cell> = net.committed_cells().filter(|&c| net.upstream_count(c) == 0).collect();
    stack.reverse();
    while let Some(cell) = stack.pop() {
        if let Some(down) = net.downstream(cell) {
            let (ci, di) = (gs.index(cell), gs.index(down));
            acc[di] += acc[ci];
            pending[di] -= 1;
            if pending[di] == 0 {
                stack.push(down);
            }
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    HangEdge,
    NonHangEdge,
}

/// One junction-to-junction stretch of the tree, upstream end first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeGeometry {
    pub kind: EdgeKind,
    pub cells: Vec<Cell>,
    /// Cell centres in map units.
    pub polyline: Vec<Point>,
    pub volume: f64,
    /// Stroke width in millimetres; filled in by [`assign_widths`].
    pub width: f64,
    /// Destination index at the upstream end of a hang edge.
    pub destination: Option<usize>,
}

impl EdgeGeometry {
    pub fn upstream_end(&self) -> Cell {
        self.cells[0]
    }

    pub fn downstream_end(&self) -> Cell {
        *self.cells.last().expect("edges have at least two cells")
    }

    /// Unweighted polyline length in map units.
    pub fn length(&self) -> f64 {
        self.polyline.windows(2).map(|w| w[0].dist(w[1])).sum()
    }
}

/// Edge-node cells: the origin, leaves, and junctions with two or more
/// upstream branches.
pub fn is_edge_node(net: &FlowNetwork, cell: Cell) -> bool {
    cell == net.origin() || net.upstream_count(cell) != 1
}

/// Split the tree into maximal edges between edge nodes.
pub fn edge_extract(gs: &GridSpace, net: &FlowNetwork, accum: &[f64]) -> Vec<EdgeGeometry> {
    let mut edges = Vec::new();
    for start in net.committed_cells() {
        if start == net.origin() || !is_edge_node(net, start) {
            continue;
        }
        let mut cells = vec![start];
        let mut cur = start;
        while let Some(down) = net.downstream(cur) {
            cells.push(down);
            if is_edge_node(net, down) {
                break;
            }
            cur = down;
        }
        let leaf = net.upstream_count(start) == 0;
        let destination = match gs.info(start).role {
            CellRole::Destination(d) => Some(d),
            _ => None,
        };
        // Read the volume at the last step: a destination passed through
        // mid-edge adds to everything below it.
        let volume = accum[gs.index(cells[cells.len() - 2])];
        edges.push(EdgeGeometry {
            kind: if leaf { EdgeKind::HangEdge } else { EdgeKind::NonHangEdge },
            polyline: cells.iter().map(|&c| gs.cell_center(c)).collect(),
            cells,
            volume,
            width: 0.0,
            destination: if leaf { destination } else { None },
        });
    }
    edges
}

/// Stroke width for volume `fv` out of `fv_sum`: a quarter-sine ramp from
/// `w_min` to `w_max`.
pub fn width(fv: f64, fv_sum: f64, w_max: f64, w_min: f64) -> Result<f64> {
    if fv > fv_sum {
        return Err(Error::VolumeExceedsTotal { volume: fv, total: fv_sum });
    }
    Ok((fv / fv_sum * std::f64::consts::FRAC_PI_2).sin() * (w_max - w_min) + w_min)
}

pub fn assign_widths(edges: &mut [EdgeGeometry], fv_sum: f64, w_max: f64, w_min: f64) -> Result<()> {
    for e in edges {
        e.width = width(e.volume, fv_sum, w_max, w_min)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkerKind {
    Origin,
    Destination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub id: String,
    pub kind: MarkerKind,
    /// Centre of the node's cell.
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedEdge {
    pub geometry: EdgeGeometry,
    pub curve: SmoothCurve,
}

/// Everything the map document needs. Edges are kept width-descending.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedMap {
    pub edges: Vec<RenderedEdge>,
    pub markers: Vec<Marker>,
    pub regions: Vec<Polygon>,
    pub extent: Rect,
}

impl RenderedMap {
    pub fn new(gs: &GridSpace, nodes: &NodeSet, edges: Vec<EdgeGeometry>, regions: Vec<Polygon>) -> Self {
        let mut edges: Vec<RenderedEdge> = edges
            .into_iter()
            .map(|g| RenderedEdge { curve: smooth(&g.polyline), geometry: g })
            .collect();
        // Width descending; ties by position for a stable document.
        edges.sort_by(|a, b| {
            b.geometry
                .width
                .total_cmp(&a.geometry.width)
                .then(a.geometry.upstream_end().cmp(&b.geometry.upstream_end()))
        });
        let mut markers = vec![Marker {
            id: nodes.origin_id.clone(),
            kind: MarkerKind::Origin,
            position: gs.cell_center(gs.origin_cell()),
        }];
        markers.extend(nodes.destinations.iter().zip(gs.destination_cells()).map(|(d, &c)| Marker {
            id: d.id.clone(),
            kind: MarkerKind::Destination,
            position: gs.cell_center(c),
        }));
        Self { edges, markers, regions, extent: gs.extent() }
    }
}

/// Sidecar record for one edge.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeRecord {
    pub kind: EdgeKind,
    #[serde(rename = "Ev")]
    pub volume: f64,
    pub length: f64,
    pub width: f64,
    pub endpoints: [Point; 2],
    pub destination: Option<String>,
}

pub fn edge_records(map: &RenderedMap, nodes: &NodeSet) -> Vec<EdgeRecord> {
    map.edges
        .iter()
        .map(|e| {
            let g = &e.geometry;
            EdgeRecord {
                kind: g.kind,
                volume: g.volume,
                length: g.length(),
                width: g.width,
                endpoints: [g.polyline[0], *g.polyline.last().expect("non-empty")],
                destination: g.destination.map(|d| nodes.destinations[d].id.clone()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_examples() {
        assert_eq!(width(10.0, 10.0, 2.0, 0.1).unwrap(), 2.0);
        assert!((width(1e-12, 10.0, 2.0, 0.1).unwrap() - 0.1).abs() < 1e-9);
        assert!((width(1.0, 3.0, 2.1, 0.1).unwrap() - 1.1).abs() < 1e-12);
        assert!(matches!(width(11.0, 10.0, 2.0, 0.1), Err(Error::VolumeExceedsTotal { .. })));
    }
}
