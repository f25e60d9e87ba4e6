//! Raster flow-direction layout for one-to-many flow maps.
//!
//! Nodes are snapped to a square grid, each destination is routed to the
//! origin through a penalised multi-goal Dijkstra search, and the resulting
//! tree is rendered with volume-scaled strokes.

// Negated comparisons reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod layout;
pub mod metrics;
pub mod pipeline;
pub mod render;
pub mod search;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use geometry::{Geometry, Point, Polygon, Rect};
pub use grid::{build_grid, Cell, Destination, ExtentMode, GridConfig, GridSpace, NodeSet, Region, RegionSet};
pub use layout::{assign_all, FlowNetwork, IterationRecord, Layout, LayoutParams, PathType};
pub use metrics::MetricsReport;
pub use pipeline::{run, RunOutput};
pub use search::{CandidatePath, Penalty, SearchContext, SearchParams};
