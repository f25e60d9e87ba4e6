//! End-to-end run: grid, layout, rendering and metrics.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::grid::{build_grid, GridSpace, NodeSet, RegionSet};
use crate::layout::{assign_all, Layout};
use crate::metrics::{self, MetricsReport};
use crate::render::{self, edge_records, emit_svg, EdgeGeometry, RenderedMap};

/// Metrics document written next to the map.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub resolution: f64,
    pub nrows: usize,
    pub ncols: usize,
    pub destinations: usize,
    pub obstacle_cells: usize,
    /// Tree length summed cell by cell; equals `TL`.
    pub tree_length: f64,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

pub struct RunOutput {
    pub grid: GridSpace,
    pub layout: Layout,
    pub edges: Vec<EdgeGeometry>,
    pub map: RenderedMap,
    pub summary: RunSummary,
}

impl RunOutput {
    pub fn svg(&self, cfg: &RunConfig) -> String {
        emit_svg(&self.map, &cfg.svg_config())
    }

    pub fn metrics_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("metrics serialise") + "\n"
    }

    /// One JSON object per iteration.
    pub fn log_jsonl(&self) -> String {
        self.layout
            .log
            .iter()
            .map(|r| serde_json::to_string(r).expect("log serialises") + "\n")
            .collect()
    }

    pub fn edges_json(&self, nodes: &NodeSet) -> String {
        serde_json::to_string_pretty(&edge_records(&self.map, nodes)).expect("edges serialise") + "\n"
    }
}

pub fn run(nodes: &NodeSet, regions: &RegionSet, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = build_grid(nodes, regions, &cfg.grid_config())?;
    run_on_grid(grid, nodes, regions, cfg)
}

/// Same as [`run`] on a prepared grid.
pub fn run_on_grid(grid: GridSpace, nodes: &NodeSet, regions: &RegionSet, cfg: &RunConfig) -> Result<RunOutput> {
    let params = cfg.layout_params(grid.resolution(), nodes.max_volume());
    let layout = assign_all(&grid, nodes, &params)?;
    let net = &layout.network;
    let accum = render::accumulate(&grid, net, nodes);
    let mut edges = render::edge_extract(&grid, net, &accum);
    // The origin's accumulation is the total as summed along the tree, so no
    // edge can exceed it through rounding.
    let fv_sum = accum[grid.index(grid.origin_cell())];
    render::assign_widths(&mut edges, fv_sum, cfg.w_max, cfg.w_min)?;
    let report = metrics::compute(&grid, net, &edges, &cfg.thresholds, cfg.t_a);
    let summary = RunSummary {
        resolution: grid.resolution(),
        nrows: grid.nrows(),
        ncols: grid.ncols(),
        destinations: nodes.destinations.len(),
        obstacle_cells: grid.obstacle_count(),
        tree_length: metrics::tree_length(&grid, net),
        metrics: report,
    };
    let backdrop = regions.regions.iter().map(|r| r.polygon.clone()).collect();
    let map = RenderedMap::new(&grid, nodes, edges.clone(), backdrop);
    Ok(RunOutput { grid, layout, edges, map, summary })
}

/// Baseline plus one run per disabled strategy.
pub fn ablation(nodes: &NodeSet, regions: &RegionSet, base: &RunConfig) -> Result<Vec<(String, MetricsReport)>> {
    let mut rows = vec![("all".to_string(), run(nodes, regions, base)?.summary.metrics)];
    for n in 1..=7 {
        let mut cfg = base.clone();
        cfg.set_strategy(n, false)?;
        rows.push((format!("st{n}=off"), run(nodes, regions, &cfg)?.summary.metrics));
    }
    Ok(rows)
}

/// Tab-separated matrix: one row per configuration.
pub fn ablation_table(rows: &[(String, MetricsReport)]) -> String {
    let mut out = String::from("config\tTL\tEL_min\tCv(%)\tC_aa\tC_pc\tC_o\n");
    for (name, m) in rows {
        let _ = writeln!(
            out,
            "{name}\t{:.1}\t{}\t{}\t{}\t{}\t{}",
            m.tl,
            m.el_min.map_or("-".into(), |v| format!("{v:.1}")),
            m.cv.map_or("-".into(), |v| format!("{v:.1}")),
            m.c_aa,
            m.c_pc,
            m.c_o
        );
    }
    out
}
