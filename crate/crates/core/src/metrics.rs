//! Layout quality measures. Everything here reads the unsmoothed cell-centre
//! polylines, so numbers do not depend on the curve drawing.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::{point_segment_distance, segment_contact, SegmentContact};
use crate::grid::{Cell, GridSpace};
use crate::layout::FlowNetwork;
use crate::render::{EdgeGeometry, EdgeKind};
use crate::search::{lattice_dir, vector_angle};

pub const DEFAULT_THRESHOLDS: [f64; 4] = [100_000.0, 70_000.0, 40_000.0, 20_000.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCount {
    pub threshold: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "TL")]
    pub tl: f64,
    /// Hang-edge lengths in edge order.
    #[serde(rename = "EL")]
    pub el: Vec<f64>,
    #[serde(rename = "EL_min")]
    pub el_min: Option<f64>,
    /// Number of hang edges shorter than each threshold.
    #[serde(rename = "EL_below")]
    pub el_below: Vec<ThresholdCount>,
    /// Population coefficient of variation of `el`, percent.
    #[serde(rename = "Cv")]
    pub cv: Option<f64>,
    #[serde(rename = "C_aa")]
    pub c_aa: usize,
    #[serde(rename = "C_pc")]
    pub c_pc: usize,
    #[serde(rename = "C_o")]
    pub c_o: usize,
}

/// Population standard deviation over mean, in percent.
pub fn coefficient_of_variation(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return None;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(var.sqrt() / mean * 100.0)
}

/// Crossings between distinct edges, on lattice coordinates with exact
/// integer tests. A contact point counts unless it is an end of both edges.
pub fn crossing_count(edges: &[EdgeGeometry]) -> usize {
    let lattice: Vec<Vec<(i64, i64)>> = edges.iter().map(|e| e.cells.iter().map(|c| c.lattice()).collect()).collect();
    let bbox: Vec<((i64, i64), (i64, i64))> = lattice
        .iter()
        .map(|pts| {
            let (mut lo, mut hi) = (pts[0], pts[0]);
            for p in pts {
                lo = (lo.0.min(p.0), lo.1.min(p.1));
                hi = (hi.0.max(p.0), hi.1.max(p.1));
            }
            (lo, hi)
        })
        .collect();

    let mut count = 0;
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (a, b) = (bbox[i], bbox[j]);
            if a.1 .0 < b.0 .0 || b.1 .0 < a.0 .0 || a.1 .1 < b.0 .1 || b.1 .1 < a.0 .1 {
                continue;
            }
            count += pair_crossings(&lattice[i], &lattice[j]);
        }
    }
    count
}

fn pair_crossings(p: &[(i64, i64)], q: &[(i64, i64)]) -> usize {
    let ends_p = [p[0], p[p.len() - 1]];
    let ends_q = [q[0], q[q.len() - 1]];
    let mut proper = 0;
    let mut touches: BTreeSet<(i64, i64)> = BTreeSet::new();
    for s in p.windows(2) {
        for t in q.windows(2) {
            match segment_contact(s[0], s[1], t[0], t[1]) {
                SegmentContact::Disjoint => {}
                SegmentContact::Proper => proper += 1,
                SegmentContact::Touch => {
                    for &pt in &[s[0], s[1], t[0], t[1]] {
                        let on_s = on_lattice_segment(s[0], s[1], pt);
                        let on_t = on_lattice_segment(t[0], t[1], pt);
                        if on_s && on_t {
                            touches.insert(pt);
                        }
                    }
                }
            }
        }
    }
    let shared_end = |pt: &(i64, i64)| ends_p.contains(pt) && ends_q.contains(pt);
    proper + touches.iter().filter(|pt| !shared_end(pt)).count()
}

fn on_lattice_segment(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> bool {
    crate::geometry::orient(a, b, p) == 0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// Node cells lying within half a cell of an edge that does not end at them.
/// Each node counts at most once.
pub fn overlap_count(gs: &GridSpace, edges: &[EdgeGeometry]) -> usize {
    let half = gs.resolution() / 2.0;
    let mut nodes = vec![gs.origin_cell()];
    nodes.extend_from_slice(gs.destination_cells());
    nodes
        .iter()
        .filter(|&&cell| {
            let p = gs.cell_center(cell);
            edges.iter().any(|e| {
                if e.upstream_end() == cell || e.downstream_end() == cell {
                    return false;
                }
                e.polyline.windows(2).any(|w| point_segment_distance(p, w[0], w[1]) < half)
            })
        })
        .count()
}

/// Flow-in angles at non-origin junctions that are at most `t_a`: for each
/// hang edge, the angle between its last step and the junction's downstream
/// step.
pub fn acute_angle_count(net: &FlowNetwork, edges: &[EdgeGeometry], t_a: f64) -> usize {
    edges
        .iter()
        .filter(|e| e.kind == EdgeKind::HangEdge)
        .filter(|e| {
            let j = e.downstream_end();
            let Some(down) = net.downstream(j) else {
                return false;
            };
            let prev = e.cells[e.cells.len() - 2];
            vector_angle(lattice_dir(j, prev), lattice_dir(j, down)) <= t_a
        })
        .count()
}

/// Length of `orth` straight and `diag` diagonal cell steps.
fn lattice_length(rs: f64, orth: usize, diag: usize) -> f64 {
    rs * (orth as f64 + std::f64::consts::SQRT_2 * diag as f64)
}

fn count_step(a: Cell, b: Cell, orth: &mut usize, diag: &mut usize) {
    if a.is_diagonal_to(b) {
        *diag += 1;
    } else {
        *orth += 1;
    }
}

/// Total length of the edges, from their step counts.
pub fn total_length(rs: f64, edges: &[EdgeGeometry]) -> f64 {
    let (mut orth, mut diag) = (0, 0);
    for e in edges {
        for w in e.cells.windows(2) {
            count_step(w[0], w[1], &mut orth, &mut diag);
        }
    }
    lattice_length(rs, orth, diag)
}

/// Geometric tree length counted per committed cell, independent of the edge
/// decomposition. Equals [`total_length`] exactly.
pub fn tree_length(gs: &GridSpace, net: &FlowNetwork) -> f64 {
    let (mut orth, mut diag) = (0, 0);
    for c in net.committed_cells() {
        if let Some(d) = net.downstream(c) {
            count_step(c, d, &mut orth, &mut diag);
        }
    }
    lattice_length(gs.resolution(), orth, diag)
}

pub fn compute(gs: &GridSpace, net: &FlowNetwork, edges: &[EdgeGeometry], thresholds: &[f64], t_a: f64) -> MetricsReport {
    let tl = total_length(gs.resolution(), edges);
    let el: Vec<f64> = edges.iter().filter(|e| e.kind == EdgeKind::HangEdge).map(EdgeGeometry::length).collect();
    let el_min = el.iter().copied().min_by(f64::total_cmp);
    let el_below = thresholds
        .iter()
        .map(|&t| ThresholdCount { threshold: t, count: el.iter().filter(|&&l| l < t).count() })
        .collect();
    MetricsReport {
        tl,
        cv: coefficient_of_variation(&el),
        el_min,
        el_below,
        el,
        c_aa: acute_angle_count(net, edges, t_a),
        c_pc: crossing_count(edges),
        c_o: overlap_count(gs, edges),
    }
}

impl MetricsReport {
    /// One-row text table: TL, EL_min, counts below thresholds, Cv and the
    /// three conflict counts.
    pub fn table(&self) -> String {
        let mut header = String::from("TL\tEL_min");
        let mut row = format!("{:.1}\t{}", self.tl, fmt_opt(self.el_min, 1));
        for t in &self.el_below {
            let _ = write!(header, "\tEL<{}", t.threshold);
            let _ = write!(row, "\t{}", t.count);
        }
        header.push_str("\tCv(%)\tC_aa\tC_pc\tC_o");
        let _ = write!(row, "\t{}\t{}\t{}\t{}", fmt_opt(self.cv, 1), self.c_aa, self.c_pc, self.c_o);
        format!("{header}\n{row}\n")
    }
}

fn fmt_opt(v: Option<f64>, places: usize) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.places$}"))
}
