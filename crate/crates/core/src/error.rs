use thiserror::Error;

use crate::grid::Cell;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid node set: {0}")]
    InvalidNodes(String),

    #[error("duplicate points {0} and {1}: resolution would be zero")]
    DuplicatePoints(String, String),

    #[error("resolution too coarse: {0} and {1} fall in the same cell")]
    ResolutionTooCoarse(String, String),

    #[error("point of {0} falls in an obstacle cell")]
    PointInObstacle(String),

    #[error("point ({x}, {y}) lies outside the grid extent")]
    OutOfExtent { x: f64, y: f64 },

    #[error("cell ({row}, {col}) lies outside the grid")]
    CellOutOfBounds { row: i64, col: i64 },

    #[error("cells {0} and {1} are not 8-neighbours")]
    NotAdjacent(Cell, Cell),

    #[error("destination unreachable: {0}")]
    Unreachable(String),

    #[error("stale candidate for {id}: {reason}")]
    StaleCandidate { id: String, reason: String },

    #[error("edge volume {volume} exceeds total volume {total}")]
    VolumeExceedsTotal { volume: f64, total: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("node CSV: {0}")]
    NodeCsv(String),

    #[error("region GeoJSON: {0}")]
    RegionGeoJson(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
