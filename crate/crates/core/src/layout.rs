//! Iterative assignment: route the most important remaining destination,
//! commit it, repeat.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridSpace, NodeSet};
use crate::search::{flow_in_penalties, potential_accumulation, CandidatePath, Penalty, SearchContext, SearchParams, StepUnits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathType {
    /// Joins the tree only at the origin.
    Type1,
    /// Merges into an existing path.
    Type2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommittedPath {
    pub destination: usize,
    pub cells: Vec<Cell>,
    pub flow_in: Cell,
    pub sub_pl1: f64,
    pub sub_pl2: f64,
    pub pl: f64,
    pub penalties: Vec<Penalty>,
    pub path_type: PathType,
}

/// The committed drainage tree. Every committed cell except the origin has
/// exactly one downstream neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    ncols: usize,
    origin: Cell,
    committed: Vec<bool>,
    downstream: Vec<Option<Cell>>,
    /// Step units from each cell to the origin; lengths derive from these so
    /// equal routes give bit-identical lengths.
    downstream_units: Vec<StepUnits>,
    resolution: f64,
    upstream_count: Vec<u8>,
    paths: Vec<Option<CommittedPath>>,
    order: Vec<usize>,
}

impl FlowNetwork {
    /// A network holding only the origin cell.
    pub fn new(gs: &GridSpace) -> Self {
        let n = gs.len();
        let mut committed = vec![false; n];
        committed[gs.index(gs.origin_cell())] = true;
        Self {
            ncols: gs.ncols(),
            origin: gs.origin_cell(),
            committed,
            downstream: vec![None; n],
            downstream_units: vec![StepUnits::default(); n],
            resolution: gs.resolution(),
            upstream_count: vec![0; n],
            paths: vec![None; gs.destination_cells().len()],
            order: Vec::new(),
        }
    }

    #[inline]
    fn idx(&self, c: Cell) -> usize {
        c.row * self.ncols + c.col
    }

    pub fn origin(&self) -> Cell {
        self.origin
    }

    pub fn is_committed(&self, c: Cell) -> bool {
        self.committed[self.idx(c)]
    }

    pub fn downstream(&self, c: Cell) -> Option<Cell> {
        self.downstream[self.idx(c)]
    }

    /// D8 code of the committed step out of `c`.
    pub fn direction(&self, c: Cell) -> Option<u8> {
        self.downstream(c).and_then(|d| crate::search::direction_code(c, d))
    }

    /// Weighted length from `c` to the origin along the tree.
    pub fn downstream_length(&self, c: Cell) -> f64 {
        self.downstream_units[self.idx(c)].length(self.resolution)
    }

    pub fn upstream_count(&self, c: Cell) -> usize {
        self.upstream_count[self.idx(c)] as usize
    }

    pub fn path(&self, destination: usize) -> Option<&CommittedPath> {
        self.paths[destination].as_ref()
    }

    pub fn paths(&self) -> impl Iterator<Item = &CommittedPath> {
        self.paths.iter().flatten()
    }

    /// Destinations in commit order.
    pub fn commit_order(&self) -> &[usize] {
        &self.order
    }

    pub fn routed_count(&self) -> usize {
        self.order.len()
    }

    /// Committed cells in index order.
    pub fn committed_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let ncols = self.ncols;
        self.committed
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| Cell::new(i / ncols, i % ncols))
    }

    pub fn committed_len(&self) -> usize {
        self.committed.iter().filter(|&&c| c).count()
    }

    /// Commit a candidate. The candidate must have been searched against the
    /// current state of this network.
    pub fn incorporate(&mut self, gs: &GridSpace, nodes: &NodeSet, c: &CandidatePath) -> Result<()> {
        let id = &nodes.destinations[c.destination].id;
        let stale = |reason: String| Error::StaleCandidate { id: id.clone(), reason };
        if self.paths[c.destination].is_some() {
            return Err(stale("destination already routed".into()));
        }
        let (Some(&first), Some(&last)) = (c.cells.first(), c.cells.last()) else {
            return Err(stale("empty path".into()));
        };
        if first != gs.destination_cells()[c.destination] {
            return Err(stale(format!("path starts at {first}, not at the destination cell")));
        }
        if last != c.flow_in || !self.is_committed(last) {
            return Err(stale(format!("flow-in cell {last} is not on the tree")));
        }
        for (i, &cell) in c.cells[..c.cells.len() - 1].iter().enumerate() {
            if self.is_committed(cell) {
                return Err(stale(format!("cell {cell} is already committed")));
            }
            if gs.is_obstacle(cell) {
                return Err(stale(format!("cell {cell} is an obstacle")));
            }
            if !cell.is_neighbor(c.cells[i + 1]) {
                return Err(stale(format!("cells {cell} and {} are not adjacent", c.cells[i + 1])));
            }
            if c.cells[..i].contains(&cell) {
                return Err(stale(format!("cell {cell} repeats")));
            }
        }

        let base = self.downstream_units[self.idx(last)];
        let mut suffix = StepUnits::default();
        for w in c.cells.windows(2).rev() {
            let (cell, down) = (w[0], w[1]);
            suffix = StepUnits::between(gs, cell, down) + suffix;
            let i = self.idx(cell);
            self.committed[i] = true;
            self.downstream[i] = Some(down);
            self.downstream_units[i] = base + suffix;
            let d = self.idx(down);
            self.upstream_count[d] = self.upstream_count[d].saturating_add(1);
        }
        self.paths[c.destination] = Some(CommittedPath {
            destination: c.destination,
            cells: c.cells.clone(),
            flow_in: c.flow_in,
            sub_pl1: c.sub_pl1,
            sub_pl2: c.sub_pl2,
            pl: c.pl,
            penalties: c.penalties.clone(),
            path_type: classify_path(c, self),
        });
        self.order.push(c.destination);
        Ok(())
    }

    /// Checks the tree invariant: every committed cell drains to the origin
    /// without cycles, and upstream counts agree with the downstream links.
    pub fn validate_tree(&self, gs: &GridSpace) -> std::result::Result<(), String> {
        let n = self.committed.len();
        let mut ups = vec![0usize; n];
        for (i, &com) in self.committed.iter().enumerate() {
            let cell = gs.cell_of(i);
            match (com, self.downstream[i]) {
                (false, Some(_)) => return Err(format!("uncommitted cell {cell} has a direction")),
                (true, None) if cell != self.origin => return Err(format!("committed cell {cell} has no direction")),
                (true, Some(_)) if cell == self.origin => return Err("origin has a direction".into()),
                (true, Some(d)) => {
                    if !cell.is_neighbor(d) {
                        return Err(format!("{cell} drains to non-neighbour {d}"));
                    }
                    if !self.is_committed(d) {
                        return Err(format!("{cell} drains to uncommitted {d}"));
                    }
                    if gs.is_obstacle(cell) {
                        return Err(format!("committed cell {cell} is an obstacle"));
                    }
                    ups[self.idx(d)] += 1;
                }
                _ => {}
            }
        }
        for (i, &u) in ups.iter().enumerate() {
            if u != self.upstream_count[i] as usize {
                return Err(format!("upstream count mismatch at {}", gs.cell_of(i)));
            }
        }
        // Reverse BFS from the origin must reach every committed cell.
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut edges = 0usize;
        for i in 0..n {
            if let Some(d) = self.downstream[i] {
                children[self.idx(d)].push(i);
                edges += 1;
            }
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.idx(self.origin)]);
        let mut reached = 0usize;
        while let Some(i) = queue.pop_front() {
            if seen[i] {
                return Err(format!("cycle through {}", gs.cell_of(i)));
            }
            seen[i] = true;
            reached += 1;
            queue.extend(children[i].iter().copied());
        }
        let total = self.committed_len();
        if reached != total {
            return Err(format!("{} committed cells do not reach the origin", total - reached));
        }
        if total != edges + 1 {
            return Err(format!("{total} cells but {edges} edges"));
        }
        Ok(())
    }
}

/// Type 1 when the path flows straight into the origin.
pub fn classify_path(c: &CandidatePath, net: &FlowNetwork) -> PathType {
    if c.flow_in == net.origin() {
        PathType::Type1
    } else {
        PathType::Type2
    }
}

/// Importance used to pick the next path to commit; Type 1 paths get a bonus.
pub fn path_importance(pl: f64, path_type: PathType, g_im: f64) -> f64 {
    match path_type {
        PathType::Type1 => pl + g_im,
        PathType::Type2 => pl,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub search: SearchParams,
    /// Type 1 importance bonus, map units; zero disables it.
    pub g_im: f64,
    /// Worker threads for per-iteration candidate searches.
    pub threads: usize,
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub destination: String,
    #[serde(rename = "PL")]
    pub pl: f64,
    pub importance: f64,
    #[serde(rename = "type")]
    pub path_type: PathType,
    pub penalties: Vec<Penalty>,
    pub flow_in: Cell,
    pub sub_pl1: f64,
    pub sub_pl2: f64,
    pub cells: usize,
    /// Importance of the strongest candidate left waiting this iteration.
    pub runner_up_importance: Option<f64>,
    /// Destinations whose search needed all eight directions this iteration.
    pub fallbacks: Vec<String>,
    /// Cells dropped because the path ran through the tree before its flow-in.
    pub truncated: usize,
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub network: FlowNetwork,
    pub log: Vec<IterationRecord>,
}

/// Route every destination into one tree rooted at the origin.
pub fn assign_all(gs: &GridSpace, nodes: &NodeSet, params: &LayoutParams) -> Result<Layout> {
    let pf = potential_accumulation(gs, nodes, params.search.k);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut net = FlowNetwork::new(gs);
    let mut remaining: Vec<usize> = (0..nodes.destinations.len()).collect();
    let mut log = Vec::with_capacity(remaining.len());

    while !remaining.is_empty() {
        let ctx = SearchContext::new(gs, nodes, &net, &pf, params.search);
        let candidates: Vec<CandidatePath> = if params.threads > 1 {
            pool.install(|| remaining.par_iter().map(|&d| ctx.find_best_path(d)).collect::<Result<_>>())?
        } else {
            remaining.iter().map(|&d| ctx.find_best_path(d)).collect::<Result<_>>()?
        };

        let scored: Vec<(f64, &CandidatePath)> = candidates
            .iter()
            .map(|c| (path_importance(c.pl, classify_path(c, &net), params.g_im), c))
            .collect();
        let (best_pos, &(importance, best)) = scored
            .iter()
            .enumerate()
            .max_by(|(_, (ia, a)), (_, (ib, b))| {
                ia.total_cmp(ib)
                    .then(a.pl.total_cmp(&b.pl))
                    .then_with(|| nodes.destinations[b.destination].id.cmp(&nodes.destinations[a.destination].id))
            })
            .expect("remaining is non-empty");
        let runner_up_importance = scored
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best_pos)
            .map(|(_, &(imp, _))| imp)
            .max_by(f64::total_cmp);
        let fallbacks = candidates
            .iter()
            .filter(|c| c.fallback)
            .map(|c| nodes.destinations[c.destination].id.clone())
            .collect();

        let (chosen, truncated) = if params.search.block_committed {
            (best.clone(), 0)
        } else {
            truncate_at_tree(gs, &net, best, &params.search)
        };
        drop(ctx);
        net.incorporate(gs, nodes, &chosen)?;
        let committed = net.path(chosen.destination).expect("just committed");
        log.push(IterationRecord {
            iteration: log.len() + 1,
            destination: nodes.destinations[chosen.destination].id.clone(),
            pl: chosen.pl,
            importance,
            path_type: committed.path_type,
            penalties: chosen.penalties.clone(),
            flow_in: chosen.flow_in,
            sub_pl1: chosen.sub_pl1,
            sub_pl2: chosen.sub_pl2,
            cells: chosen.cells.len(),
            runner_up_importance,
            fallbacks,
            truncated,
        });
        remaining.retain(|&d| d != chosen.destination);
    }
    Ok(Layout { network: net, log })
}

/// With crossings allowed a path may run through committed cells before its
/// chosen flow-in. The tree keeps one direction per cell, so the path is cut
/// at the first committed cell, which becomes the flow-in.
fn truncate_at_tree(gs: &GridSpace, net: &FlowNetwork, c: &CandidatePath, p: &SearchParams) -> (CandidatePath, usize) {
    let Some(cut) = c.cells.iter().position(|&x| net.is_committed(x)) else {
        return (c.clone(), 0);
    };
    if cut + 1 == c.cells.len() {
        return (c.clone(), 0);
    }
    let cells = c.cells[..=cut].to_vec();
    let flow_in = cells[cut];
    let units = cells
        .windows(2)
        .fold(StepUnits::default(), |acc, w| acc + StepUnits::between(gs, w[0], w[1]));
    let sub_pl1 = units.length(gs.resolution());
    let sub_pl2 = net.downstream_length(flow_in);
    let penalties = if cells.len() >= 2 {
        flow_in_penalties(gs, net, p, cells[cells.len() - 2], flow_in, sub_pl1)
    } else {
        Vec::new()
    };
    let pl = crate::search::penalized_length(sub_pl1, sub_pl2, p.omega, penalties.len(), p.pl_pen);
    let dropped = c.cells.len() - cells.len();
    (
        CandidatePath { cells, flow_in, sub_pl1, sub_pl2, penalties, pl, ..c.clone() },
        dropped,
    )
}
