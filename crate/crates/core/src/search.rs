//! Constrained maze search: the best penalised path from one destination
//! cell into the committed tree.
//!
//! All committed cells are goals at once. Reaching goal `g` from its
//! neighbour `c` costs `len(c) + step(c, g) + ω·down(g) + penalties`, where
//! `down(g)` is the weighted length from `g` to the origin along the tree.
//! Frontier order is `(length, accumulated direction weight, cell index)`, so
//! path length decides and the direction weight only separates equal-length
//! routes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridSpace, NodeSet};
use crate::layout::FlowNetwork;

/// D8 offsets `(Δrow, Δcol)`. Code 0 is east and codes increase clockwise,
/// so 1 = SE, 2 = S, ... 7 = NE. Rows grow northwards.
pub const D8: [(i64, i64); 8] = [(0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1)];

/// D8 code of the step `from -> to`, if they are 8-neighbours.
pub fn direction_code(from: Cell, to: Cell) -> Option<u8> {
    let d = (to.row as i64 - from.row as i64, to.col as i64 - from.col as i64);
    D8.iter().position(|&o| o == d).map(|i| i as u8)
}

/// Neighbour of `cell` in direction `code`, if inside the grid.
pub fn neighbor(gs: &GridSpace, cell: Cell, code: u8) -> Option<Cell> {
    let (dr, dc) = D8[code as usize];
    gs.checked_cell(cell.row as i64 + dr, cell.col as i64 + dc)
}

/// Step length split into orthogonal and diagonal parts, each the sum of
/// `0.5·(δa + δb)` over steps of that kind. Keeping the parts apart makes
/// equal-length routes compare exactly equal on integer weights.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepUnits {
    pub orth: f64,
    pub diag: f64,
}

impl StepUnits {
    pub fn between(gs: &GridSpace, a: Cell, b: Cell) -> Self {
        let half = 0.5 * (gs.weight(a) + gs.weight(b));
        if a.is_diagonal_to(b) {
            Self { orth: 0.0, diag: half }
        } else {
            Self { orth: half, diag: 0.0 }
        }
    }

    pub fn length(self, resolution: f64) -> f64 {
        resolution * (self.orth + SQRT_2 * self.diag)
    }
}

impl std::ops::Add for StepUnits {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { orth: self.orth + rhs.orth, diag: self.diag + rhs.diag }
    }
}

/// Weighted distance between two 8-neighbours.
pub fn step_cost(gs: &GridSpace, a: Cell, b: Cell) -> Result<f64> {
    if !a.is_neighbor(b) {
        return Err(Error::NotAdjacent(a, b));
    }
    Ok(StepUnits::between(gs, a, b).length(gs.resolution()))
}

/// Clockwise angle in degrees, in `[0, 360)`, from east to the ray `from -> toward`.
pub fn clockwise_angle(from: Cell, toward: Cell) -> f64 {
    let dx = toward.col as f64 - from.col as f64;
    let dy = toward.row as f64 - from.row as f64;
    let a = (-dy).atan2(dx).to_degrees();
    let a = if a < 0.0 { a + 360.0 } else { a };
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// The three D8 codes around the bearing `angle` (degrees clockwise from east).
pub fn directions_for_angle(angle: f64) -> [u8; 3] {
    let a = angle.rem_euclid(360.0);
    let z = ((a / 45.0).floor() as i64).rem_euclid(8);
    [(z - 1).rem_euclid(8) as u8, z as u8, (z + 1).rem_euclid(8) as u8]
}

pub fn search_directions(from: Cell, toward: Cell) -> [u8; 3] {
    directions_for_angle(clockwise_angle(from, toward))
}

/// Potential accumulation: for every cell, the summed volume of destinations
/// within Chebyshev distance `k`.
pub fn potential_accumulation(gs: &GridSpace, nodes: &NodeSet, k: usize) -> Vec<f64> {
    let mut pf = vec![0.0; gs.len()];
    for (d, &cell) in nodes.destinations.iter().zip(gs.destination_cells()) {
        let r0 = cell.row.saturating_sub(k);
        let c0 = cell.col.saturating_sub(k);
        let r1 = (cell.row + k).min(gs.nrows() - 1);
        let c1 = (cell.col + k).min(gs.ncols() - 1);
        for row in r0..=r1 {
            for col in c0..=c1 {
                pf[gs.index(Cell::new(row, col))] += d.volume;
            }
        }
    }
    pf
}

/// Direction weight of the step from a cell with potential `pf_c` to one with
/// `pf_n`. Lower is explored first: stepping towards higher potential is cheap.
pub fn direction_weight(pf_c: f64, pf_n: f64, d_cn: f64, t_f: f64) -> f64 {
    let diff = pf_c - pf_n;
    if diff > 0.0 {
        (diff + t_f) / d_cn
    } else {
        t_f / d_cn
    }
}

/// Angle in degrees between two lattice directions.
pub fn vector_angle(u: (f64, f64), v: (f64, f64)) -> f64 {
    let dot = u.0 * v.0 + u.1 * v.1;
    let norm = u.0.hypot(u.1) * v.0.hypot(v.1);
    let deg = (dot / norm).clamp(-1.0, 1.0).acos().to_degrees();
    // Lattice angles are whole degrees; keep 90 from reading as 90.00000000000001.
    let whole = deg.round();
    if (deg - whole).abs() < 1e-9 {
        whole
    } else {
        deg
    }
}

/// Lattice direction `(Δcol, Δrow)` of `a -> b`.
pub fn lattice_dir(a: Cell, b: Cell) -> (f64, f64) {
    (b.col as f64 - a.col as f64, b.row as f64 - a.row as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Penalty {
    AcuteAngle,
    ShortHangEdge,
}

/// Fully resolved search parameters; lengths are in map units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub omega: f64,
    /// Pf window radius.
    pub k: usize,
    /// Exclusion radius around other destinations.
    pub k_rc3: usize,
    /// Acute flow-in threshold, degrees.
    pub t_a: f64,
    /// Short hang-edge threshold, weighted length.
    pub t_d: f64,
    pub t_f: f64,
    pub pl_pen: f64,
    pub penalize_acute: bool,
    pub penalize_short: bool,
    pub restrict_directions: bool,
    pub order_by_accumulation: bool,
    pub block_committed: bool,
    pub exclude_destinations: bool,
}

impl SearchParams {
    /// Defaults for a grid of resolution `rs` and largest destination volume `max_volume`.
    pub fn defaults(rs: f64, max_volume: f64) -> Self {
        Self {
            omega: 0.65,
            k: 4,
            k_rc3: 0,
            t_a: 120.0,
            t_d: SQRT_2 * rs,
            t_f: max_volume,
            pl_pen: 20.0 * rs,
            penalize_acute: true,
            penalize_short: true,
            restrict_directions: true,
            order_by_accumulation: true,
            block_committed: true,
            exclude_destinations: true,
        }
    }
}

/// A route from a destination cell into the committed tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePath {
    pub destination: usize,
    /// Destination cell first, flow-in cell last.
    pub cells: Vec<Cell>,
    pub flow_in: Cell,
    pub sub_pl1: f64,
    pub sub_pl2: f64,
    pub penalties: Vec<Penalty>,
    pub pl: f64,
    /// Accumulated direction weight of the new segment.
    pub direction_weight: f64,
    /// The restricted search found nothing and all eight directions were used.
    pub fallback: bool,
}

impl CandidatePath {
    pub fn is_empty_segment(&self) -> bool {
        self.cells.len() == 1
    }
}

/// Path length from its parts.
pub fn penalized_length(sub_pl1: f64, sub_pl2: f64, omega: f64, penalties: usize, pl_pen: f64) -> f64 {
    sub_pl1 + omega * sub_pl2 + penalties as f64 * pl_pen
}

/// The committed cell draining into `cell`, when there is exactly one.
fn single_upstream(gs: &GridSpace, net: &FlowNetwork, cell: Cell) -> Option<Cell> {
    if net.upstream_count(cell) != 1 {
        return None;
    }
    (0..8).filter_map(|code| neighbor(gs, cell, code)).find(|&u| net.downstream(u) == Some(cell))
}

/// Penalties for a path arriving at `flow_in` from `prev` after `sub_pl1`.
///
/// The acute-angle penalty covers the new branch's own angle and also the
/// case where `flow_in` is a bend of a single existing branch: merging there
/// turns that bend into a junction with a sharp flow-in angle.
pub fn flow_in_penalties(
    gs: &GridSpace,
    net: &FlowNetwork,
    p: &SearchParams,
    prev: Cell,
    flow_in: Cell,
    sub_pl1: f64,
) -> Vec<Penalty> {
    let mut out = Vec::new();
    if p.penalize_acute {
        if let Some(down) = net.downstream(flow_in) {
            let out_dir = lattice_dir(flow_in, down);
            let own = vector_angle(lattice_dir(flow_in, prev), out_dir);
            let existing = single_upstream(gs, net, flow_in).map(|u| vector_angle(lattice_dir(flow_in, u), out_dir));
            if own <= p.t_a || existing.is_some_and(|a| a <= p.t_a) {
                out.push(Penalty::AcuteAngle);
            }
        }
    }
    if p.penalize_short && sub_pl1 <= p.t_d {
        out.push(Penalty::ShortHangEdge);
    }
    out
}

/// Read-only view shared by all searches of one layout iteration.
pub struct SearchContext<'a> {
    pub grid: &'a GridSpace,
    pub nodes: &'a NodeSet,
    pub network: &'a FlowNetwork,
    pub pf: &'a [f64],
    pub params: SearchParams,
    /// Per cell, how many destination exclusion windows cover it.
    exclusion: Vec<u16>,
}

impl<'a> SearchContext<'a> {
    pub fn new(
        grid: &'a GridSpace,
        nodes: &'a NodeSet,
        network: &'a FlowNetwork,
        pf: &'a [f64],
        params: SearchParams,
    ) -> Self {
        let mut exclusion = vec![0u16; grid.len()];
        if params.exclude_destinations {
            let k = params.k_rc3;
            for &cell in grid.destination_cells() {
                for row in cell.row.saturating_sub(k)..=(cell.row + k).min(grid.nrows() - 1) {
                    for col in cell.col.saturating_sub(k)..=(cell.col + k).min(grid.ncols() - 1) {
                        exclusion[grid.index(Cell::new(row, col))] += 1;
                    }
                }
            }
        }
        Self { grid, nodes, network, pf, params, exclusion }
    }

    /// Whether `cell` is excluded while routing from `start`: obstacles, and
    /// the exclusion windows of every destination other than `start`. The
    /// origin and `start` itself are never excluded.
    pub fn is_blocked(&self, start: Cell, cell: Cell) -> bool {
        if self.grid.is_obstacle(cell) {
            return true;
        }
        if cell == start || cell == self.grid.origin_cell() {
            return false;
        }
        let mut cover = self.exclusion[self.grid.index(cell)];
        if self.params.exclude_destinations && cell.chebyshev(start) <= self.params.k_rc3 {
            cover -= 1;
        }
        cover > 0
    }

    /// A diagonal step that would cross a committed diagonal step.
    pub fn crosses_committed(&self, a: Cell, b: Cell) -> bool {
        if !a.is_diagonal_to(b) {
            return false;
        }
        let p = Cell::new(a.row, b.col);
        let q = Cell::new(b.row, a.col);
        self.network.downstream(p) == Some(q) || self.network.downstream(q) == Some(p)
    }

    /// Flow-in angle at `flow_in` for a path arriving from `upstream`:
    /// the angle between the rays `flow_in -> upstream` and
    /// `flow_in -> downstream`. The origin has no downstream branch and
    /// reports 180°.
    pub fn flow_in_angle(&self, upstream_dir: (f64, f64), flow_in: Cell) -> f64 {
        match self.network.downstream(flow_in) {
            Some(down) => vector_angle(upstream_dir, lattice_dir(flow_in, down)),
            None => 180.0,
        }
    }

    fn penalties(&self, prev: Cell, flow_in: Cell, sub_pl1: f64) -> Vec<Penalty> {
        flow_in_penalties(self.grid, self.network, &self.params, prev, flow_in, sub_pl1)
    }

    /// Best penalised path from destination `dest` into the committed tree.
    pub fn find_best_path(&self, dest: usize) -> Result<CandidatePath> {
        let start = self.grid.destination_cells()[dest];
        if self.network.is_committed(start) {
            // Already swallowed by an earlier path (only possible with the
            // crossing or exclusion refinements switched off).
            let sub_pl2 = self.network.downstream_length(start);
            return Ok(CandidatePath {
                destination: dest,
                cells: vec![start],
                flow_in: start,
                sub_pl1: 0.0,
                sub_pl2,
                penalties: Vec::new(),
                pl: penalized_length(0.0, sub_pl2, self.params.omega, 0, self.params.pl_pen),
                direction_weight: 0.0,
                fallback: false,
            });
        }
        if self.params.restrict_directions {
            let restricted = self.search(dest, start, true);
            if let Some(path) = &restricted {
                if path.penalties.is_empty() {
                    return Ok(restricted.expect("just matched"));
                }
            }
            // No terminal in the restricted cone, or only penalised ones: an
            // unrestricted detour may be cheaper.
            let open = self.search(dest, start, false).map(|mut p| {
                p.fallback = true;
                p
            });
            match (restricted, open) {
                (Some(r), Some(o)) => return Ok(if o.pl < r.pl { o } else { r }),
                (Some(r), None) => return Ok(r),
                (None, Some(o)) => return Ok(o),
                (None, None) => {}
            }
        } else if let Some(path) = self.search(dest, start, false) {
            return Ok(path);
        }
        Err(Error::Unreachable(self.nodes.destinations[dest].id.clone()))
    }

    fn search(&self, dest: usize, start: Cell, restrict: bool) -> Option<CandidatePath> {
        let gs = self.grid;
        let rs = gs.resolution();
        let origin = gs.origin_cell();
        let p = &self.params;

        let mut labels = vec![Label::UNSEEN; gs.len()];
        let mut heap = BinaryHeap::new();
        let si = gs.index(start);
        labels[si] = Label { units: StepUnits::default(), len: 0.0, sa: 0.0, pred: NONE, settled: false };
        heap.push(Entry { len: 0.0, sa: 0.0, idx: si });

        let mut best: Option<Terminal> = None;
        let all: [u8; 8] = [0, 1, 2, 3, 4, 5, 6, 7];

        while let Some(Entry { len, sa, idx }) = heap.pop() {
            if labels[idx].settled || len != labels[idx].len || sa != labels[idx].sa {
                continue;
            }
            if let Some(b) = &best {
                if len >= b.pl {
                    break;
                }
            }
            labels[idx].settled = true;
            let cell = gs.cell_of(idx);
            let units = labels[idx].units;
            let codes: &[u8] = if restrict { &search_directions(cell, origin)[..] } else { &all[..] };

            for &code in codes {
                let Some(next) = neighbor(gs, cell, code) else { continue };
                if p.block_committed && self.crosses_committed(cell, next) {
                    continue;
                }
                if self.is_blocked(start, next) {
                    continue;
                }
                let step = StepUnits::between(gs, cell, next);
                let next_units = units + step;
                let next_len = next_units.length(rs);
                let next_sa = if p.order_by_accumulation {
                    let d_cn = step.length(rs);
                    sa + direction_weight(self.pf[idx], self.pf[gs.index(next)], d_cn, p.t_f)
                } else {
                    0.0
                };

                if self.network.is_committed(next) {
                    let sub_pl2 = self.network.downstream_length(next);
                    let penalties = self.penalties(cell, next, next_len);
                    let pl = penalized_length(next_len, sub_pl2, p.omega, penalties.len(), p.pl_pen);
                    let cand = Terminal { pl, sa: next_sa, flow_in: gs.index(next), pred: idx, sub_pl1: next_len, sub_pl2, penalties };
                    if best.as_ref().is_none_or(|b| cand.better_than(b)) {
                        best = Some(cand);
                    }
                    if p.block_committed || next == origin {
                        continue;
                    }
                }

                let ni = gs.index(next);
                let l = &mut labels[ni];
                if l.settled {
                    continue;
                }
                let improves = match next_len.total_cmp(&l.len) {
                    Ordering::Less => true,
                    Ordering::Equal => next_sa < l.sa,
                    Ordering::Greater => false,
                };
                if improves {
                    *l = Label { units: next_units, len: next_len, sa: next_sa, pred: idx, settled: false };
                    heap.push(Entry { len: next_len, sa: next_sa, idx: ni });
                }
            }
        }

        let t = best?;
        let mut cells = vec![gs.cell_of(t.flow_in)];
        let mut cur = t.pred;
        while cur != NONE {
            cells.push(gs.cell_of(cur));
            cur = labels[cur].pred;
        }
        cells.reverse();
        Some(CandidatePath {
            destination: dest,
            cells,
            flow_in: gs.cell_of(t.flow_in),
            sub_pl1: t.sub_pl1,
            sub_pl2: t.sub_pl2,
            penalties: t.penalties,
            pl: t.pl,
            direction_weight: t.sa,
            fallback: false,
        })
    }
}

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Label {
    units: StepUnits,
    len: f64,
    sa: f64,
    pred: usize,
    settled: bool,
}

impl Label {
    const UNSEEN: Label = Label {
        units: StepUnits { orth: 0.0, diag: 0.0 },
        len: f64::INFINITY,
        sa: f64::INFINITY,
        pred: NONE,
        settled: false,
    };
}

struct Terminal {
    pl: f64,
    sa: f64,
    flow_in: usize,
    pred: usize,
    sub_pl1: f64,
    sub_pl2: f64,
    penalties: Vec<Penalty>,
}

impl Terminal {
    fn better_than(&self, other: &Terminal) -> bool {
        self.pl
            .total_cmp(&other.pl)
            .then(self.sa.total_cmp(&other.sa))
            .then(self.flow_in.cmp(&other.flow_in))
            .then(self.pred.cmp(&other.pred))
            == Ordering::Less
    }
}

/// Min-heap entry ordered by `(len, sa, idx)`.
#[derive(Debug, Clone, Copy)]
struct Entry {
    len: f64,
    sa: f64,
    idx: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .len
            .total_cmp(&self.len)
            .then(other.sa.total_cmp(&self.sa))
            .then(other.idx.cmp(&self.idx))
    }
}
