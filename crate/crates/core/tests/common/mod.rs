//! Independent reference implementations used by the integration tests.
//!
//! The oracle here shares no search code with the crate: it relaxes shortest
//! lattice distances Bellman-Ford style over integer step counts, derives its
//! own direction cones and angles, and enumerates every (predecessor, flow-in)
//! pair exhaustively. Only plain data (grid, tree, parameters) is borrowed.

#![allow(dead_code)]

use flowgrid::layout::{path_importance, PathType};
use flowgrid::{Cell, FlowNetwork, GridSpace, NodeSet, SearchContext, SearchParams};

/// Clockwise D8 codes starting east, written out independently of the crate.
fn offset(code: usize) -> (i64, i64) {
    let theta = (45.0 * code as f64).to_radians();
    (-(theta.sin().round() as i64), theta.cos().round() as i64)
}

fn code_of(from: Cell, to: Cell) -> usize {
    let d = (to.row as i64 - from.row as i64, to.col as i64 - from.col as i64);
    (0..8).find(|&k| offset(k) == d).expect("neighbours")
}

/// Angle between two D8 codes.
fn code_angle(a: usize, b: usize) -> f64 {
    let d = (a as i64 - b as i64).rem_euclid(8);
    45.0 * d.min(8 - d) as f64
}

/// Codes allowed from `cell` when the cone faces the origin.
fn cone(cell: Cell, origin: Cell) -> Vec<usize> {
    let east = origin.col as f64 - cell.col as f64;
    let north = origin.row as f64 - cell.row as f64;
    let cw = (-north.atan2(east).to_degrees()).rem_euclid(360.0);
    let z = ((cw / 45.0).floor() as usize) % 8;
    vec![(z + 7) % 8, z, (z + 1) % 8]
}

fn step(gs: &GridSpace, c: Cell, code: usize) -> Option<Cell> {
    let (dr, dc) = offset(code);
    let (r, col) = (c.row as i64 + dr, c.col as i64 + dc);
    (r >= 0 && col >= 0 && (r as usize) < gs.nrows() && (col as usize) < gs.ncols())
        .then(|| Cell::new(r as usize, col as usize))
}

fn length(rs: f64, (orth, diag): (u32, u32)) -> f64 {
    rs * (orth as f64 + std::f64::consts::SQRT_2 * diag as f64)
}

/// Length from `c` to the origin by walking the tree.
pub fn walk_down(gs: &GridSpace, net: &FlowNetwork, mut c: Cell) -> f64 {
    let mut n = (0, 0);
    while let Some(d) = net.downstream(c) {
        if c.row != d.row && c.col != d.col {
            n.1 += 1;
        } else {
            n.0 += 1;
        }
        c = d;
    }
    length(gs.resolution(), n)
}

fn upstreams(gs: &GridSpace, net: &FlowNetwork, c: Cell) -> Vec<Cell> {
    (0..8).filter_map(|k| step(gs, c, k)).filter(|&u| net.downstream(u) == Some(c)).collect()
}

fn penalty_count(gs: &GridSpace, net: &FlowNetwork, p: &SearchParams, prev: Cell, f: Cell, sub1: f64) -> usize {
    let mut n = 0;
    if p.penalize_acute {
        if let Some(down) = net.downstream(f) {
            let out = code_of(f, down);
            let own = code_angle(code_of(f, prev), out) <= p.t_a;
            let ups = upstreams(gs, net, f);
            let bend = ups.len() == 1 && code_angle(code_of(f, ups[0]), out) <= p.t_a;
            if own || bend {
                n += 1;
            }
        }
    }
    if p.penalize_short && sub1 <= p.t_d {
        n += 1;
    }
    n
}

#[derive(Debug, Clone)]
pub struct OracleAnswer {
    pub pl: f64,
    /// Every flow-in cell attaining `pl`, with its penalty count.
    pub minimizers: Vec<(Cell, usize)>,
}

impl OracleAnswer {
    /// Path type when every minimiser agrees on it.
    pub fn path_type(&self, origin: Cell) -> Option<PathType> {
        let t1 = self.minimizers.iter().all(|m| m.0 == origin);
        let t2 = self.minimizers.iter().all(|m| m.0 != origin);
        match (t1, t2) {
            (true, _) => Some(PathType::Type1),
            (_, true) => Some(PathType::Type2),
            _ => None,
        }
    }
}

fn blocked(gs: &GridSpace, p: &SearchParams, start: Cell, c: Cell) -> bool {
    if gs.is_obstacle(c) {
        return true;
    }
    if c == start || c == gs.origin_cell() || !p.exclude_destinations {
        return false;
    }
    gs.destination_cells().iter().any(|&d| d != start && d.chebyshev(c) <= p.k_rc3)
}

fn crosses(net: &FlowNetwork, a: Cell, b: Cell) -> bool {
    if a.row == b.row || a.col == b.col {
        return false;
    }
    let (x, y) = (Cell::new(a.row, b.col), Cell::new(b.row, a.col));
    net.downstream(x) == Some(y) || net.downstream(y) == Some(x)
}

/// Minimum penalised path length from `start` with or without the cone.
fn exhaustive(gs: &GridSpace, net: &FlowNetwork, p: &SearchParams, start: Cell, restrict: bool) -> Option<OracleAnswer> {
    let rs = gs.resolution();
    let origin = gs.origin_cell();
    let n = gs.nrows() * gs.ncols();
    let id = |c: Cell| c.row * gs.ncols() + c.col;
    let at = |i: usize| Cell::new(i / gs.ncols(), i % gs.ncols());
    let moves = |c: Cell| -> Vec<Cell> {
        let codes: Vec<usize> = if restrict { cone(c, origin) } else { (0..8).collect() };
        codes
            .into_iter()
            .filter_map(|k| step(gs, c, k))
            .filter(|&nx| !(p.block_committed && crosses(net, c, nx)))
            .filter(|&nx| !blocked(gs, p, start, nx))
            .collect()
    };
    // A cell relays the search onwards if it is the start or, when committed
    // cells are passable, any committed cell except the origin.
    let relays = |c: Cell| c == start || !net.is_committed(c) || (!p.block_committed && c != origin);

    let mut dist: Vec<Option<(u32, u32)>> = vec![None; n];
    dist[id(start)] = Some((0, 0));
    loop {
        let mut changed = false;
        for i in 0..n {
            let (Some(d), c) = (dist[i], at(i)) else { continue };
            if !relays(c) {
                continue;
            }
            for nx in moves(c) {
                if net.is_committed(nx) && !relays(nx) {
                    continue;
                }
                let nd = if nx.row != c.row && nx.col != c.col { (d.0, d.1 + 1) } else { (d.0 + 1, d.1) };
                let better = dist[id(nx)].is_none_or(|old| length(rs, nd) < length(rs, old));
                if better {
                    dist[id(nx)] = Some(nd);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut all: Vec<(f64, Cell, usize)> = Vec::new();
    for (i, &d) in dist.iter().enumerate() {
        let (Some(d), prev) = (d, at(i)) else { continue };
        if !relays(prev) {
            continue;
        }
        for f in moves(prev) {
            if !net.is_committed(f) {
                continue;
            }
            let nd = if f.row != prev.row && f.col != prev.col { (d.0, d.1 + 1) } else { (d.0 + 1, d.1) };
            let sub1 = length(rs, nd);
            let k = penalty_count(gs, net, p, prev, f, sub1);
            let pl = sub1 + p.omega * walk_down(gs, net, f) + k as f64 * p.pl_pen;
            all.push((pl, f, k));
        }
    }
    let best = all.iter().map(|a| a.0).min_by(f64::total_cmp)?;
    let mut minimizers: Vec<(Cell, usize)> = all.iter().filter(|a| a.0 == best).map(|a| (a.1, a.2)).collect();
    minimizers.sort();
    minimizers.dedup();
    Some(OracleAnswer { pl: best, minimizers })
}

/// Reference answer for one destination, `None` if unreachable. An `Err`
/// marks a tie the reference cannot resolve without the frontier order.
pub fn oracle_best(gs: &GridSpace, net: &FlowNetwork, p: &SearchParams, dest: usize) -> Result<Option<OracleAnswer>, String> {
    let start = gs.destination_cells()[dest];
    if net.is_committed(start) {
        let pl = p.omega * walk_down(gs, net, start);
        return Ok(Some(OracleAnswer { pl, minimizers: vec![(start, 0)] }));
    }
    if !p.restrict_directions {
        return Ok(exhaustive(gs, net, p, start, false));
    }
    let restricted = exhaustive(gs, net, p, start, true);
    if let Some(r) = &restricted {
        let clean = r.minimizers.iter().filter(|m| m.1 == 0).count();
        if clean == r.minimizers.len() {
            return Ok(restricted);
        }
        if clean > 0 {
            return Err(format!("restricted tie between penalised and clean flow-ins at pl {}", r.pl));
        }
    }
    let open = exhaustive(gs, net, p, start, false);
    Ok(match (restricted, open) {
        (Some(r), Some(o)) => Some(if o.pl < r.pl { o } else { r }),
        (r, o) => r.or(o),
    })
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Default)]
pub struct ReplayReport {
    pub comparisons: usize,
    pub ambiguous: usize,
    pub mismatches: Vec<String>,
}

/// Replay a layout one iteration at a time. At each step every remaining
/// destination's search result is compared with the oracle, and the chosen
/// destination with the greedy rule applied to the oracle's lengths.
pub fn replay_against_oracle(gs: &GridSpace, nodes: &NodeSet, p: &SearchParams, g_im: f64) -> ReplayReport {
    let pf = flowgrid::search::potential_accumulation(gs, nodes, p.k);
    let mut net = FlowNetwork::new(gs);
    let mut remaining: Vec<usize> = (0..nodes.destinations.len()).collect();
    let mut rep = ReplayReport::default();
    let origin = gs.origin_cell();
    while !remaining.is_empty() {
        let ctx = SearchContext::new(gs, nodes, &net, &pf, *p);
        let mut scored: Vec<(f64, f64, usize)> = Vec::new();
        let mut cands = Vec::new();
        let mut greedy_known = true;
        for &d in &remaining {
            let got = ctx.find_best_path(d).ok();
            let want = match oracle_best(gs, &net, p, d) {
                Ok(w) => w,
                Err(_) => {
                    rep.ambiguous += 1;
                    greedy_known = false;
                    cands.push(got);
                    continue;
                }
            };
            rep.comparisons += 1;
            match (&got, &want) {
                (Some(g), Some(w)) => {
                    if g.pl != w.pl {
                        rep.mismatches.push(format!("{}: search pl {} oracle pl {}", nodes.destinations[d].id, g.pl, w.pl));
                    }
                    if !w.minimizers.iter().any(|m| m.0 == g.flow_in && m.1 == g.penalties.len()) {
                        rep.mismatches.push(format!("{}: flow-in {} not an oracle minimiser", nodes.destinations[d].id, g.flow_in));
                    }
                    match w.path_type(origin) {
                        Some(t) => scored.push((path_importance(w.pl, t, g_im), w.pl, d)),
                        None => greedy_known = false,
                    }
                }
                (None, None) => {}
                _ => rep.mismatches.push(format!("{}: reachability differs", nodes.destinations[d].id)),
            }
            cands.push(got);
        }
        let Some(Some(_)) = cands.first() else { break };
        // The crate's own choice for this round.
        let chosen = {
            let mut best: Option<(f64, f64, usize, usize)> = None;
            for (pos, c) in cands.iter().enumerate() {
                let Some(c) = c else { return rep };
                let imp = path_importance(c.pl, flowgrid::layout::classify_path(c, &net), g_im);
                let key = (imp, c.pl, pos, c.destination);
                let wins = best.is_none_or(|b| {
                    imp.total_cmp(&b.0)
                        .then(c.pl.total_cmp(&b.1))
                        .then_with(|| nodes.destinations[b.3].id.cmp(&nodes.destinations[c.destination].id))
                        .is_gt()
                });
                if wins {
                    best = Some(key);
                }
            }
            best.expect("non-empty").2
        };
        if greedy_known {
            let expect = scored
                .iter()
                .max_by(|a, b| {
                    a.0.total_cmp(&b.0)
                        .then(a.1.total_cmp(&b.1))
                        .then_with(|| nodes.destinations[b.2].id.cmp(&nodes.destinations[a.2].id))
                })
                .map(|s| s.2);
            let got = cands[chosen].as_ref().map(|c| c.destination);
            if expect != got {
                rep.mismatches.push(format!("greedy choice {got:?}, oracle expects {expect:?}"));
            }
        }
        let pick = cands[chosen].clone().expect("reachable");
        drop(ctx);
        net.incorporate(gs, nodes, &pick).expect("commit");
        remaining.retain(|&d| d != pick.destination);
    }
    rep
}

pub fn default_params(gs: &GridSpace, nodes: &NodeSet) -> SearchParams {
    SearchParams::defaults(gs.resolution(), nodes.max_volume())
}
