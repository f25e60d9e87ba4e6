//! Raster model of the mapping space.
//!
//! The map is a flat lattice of square cells of side `resolution`. Row 0 is
//! the southernmost row and column 0 the westernmost, so cell `(0, 0)` sits at
//! the lower-left corner of the extent.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point, Polygon, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Chebyshev distance.
    pub fn chebyshev(self, other: Cell) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }

    pub fn is_neighbor(self, other: Cell) -> bool {
        self.chebyshev(other) == 1
    }

    pub fn is_diagonal_to(self, other: Cell) -> bool {
        self.row != other.row && self.col != other.col
    }

    /// Lattice coordinates `(col, row)` for exact geometric predicates.
    pub fn lattice(self) -> (i64, i64) {
        (self.col as i64, self.row as i64)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Destination {
    pub id: String,
    pub position: Point,
    pub volume: f64,
}

/// One origin and its weighted destinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub origin_id: String,
    pub origin: Point,
    pub destinations: Vec<Destination>,
}

impl NodeSet {
    pub fn new(origin_id: impl Into<String>, origin: Point, destinations: Vec<Destination>) -> Result<Self> {
        let nodes = Self { origin_id: origin_id.into(), origin, destinations };
        nodes.validate()?;
        Ok(nodes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.destinations.is_empty() {
            return Err(Error::InvalidNodes("at least one destination required".into()));
        }
        let mut ids = HashMap::new();
        for d in &self.destinations {
            if !(d.volume > 0.0) || !d.volume.is_finite() {
                return Err(Error::InvalidNodes(format!("volume of {} must be positive, got {}", d.id, d.volume)));
            }
            if ids.insert(d.id.as_str(), ()).is_some() || d.id == self.origin_id {
                return Err(Error::InvalidNodes(format!("duplicate id {}", d.id)));
            }
        }
        let labelled = self.labelled_points();
        for (i, (a, pa)) in labelled.iter().enumerate() {
            if !pa.x.is_finite() || !pa.y.is_finite() {
                return Err(Error::InvalidNodes(format!("non-finite coordinates for {a}")));
            }
            for (b, pb) in &labelled[i + 1..] {
                if pa == pb {
                    return Err(Error::DuplicatePoints(a.to_string(), b.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Origin first, then destinations in input order.
    pub fn labelled_points(&self) -> Vec<(&str, Point)> {
        std::iter::once((self.origin_id.as_str(), self.origin))
            .chain(self.destinations.iter().map(|d| (d.id.as_str(), d.position)))
            .collect()
    }

    pub fn total_volume(&self) -> f64 {
        self.destinations.iter().map(|d| d.volume).sum()
    }

    pub fn max_volume(&self) -> f64 {
        self.destinations.iter().map(|d| d.volume).fold(0.0, f64::max)
    }

    pub fn destination_index(&self, id: &str) -> Option<usize> {
        self.destinations.iter().position(|d| d.id == id)
    }
}

/// A base-map region; `delta` sets the traversal weight of the cells it covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub polygon: Polygon,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionSet {
    pub regions: Vec<Region>,
    pub obstacles: Vec<Geometry>,
}

impl RegionSet {
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.regions.iter().enumerate() {
            if r.polygon.exterior.len() < 3 {
                return Err(Error::RegionGeoJson(format!("region {i} has fewer than 3 vertices")));
            }
            if !r.polygon.is_simple() {
                return Err(Error::RegionGeoJson(format!("region {i} is self-intersecting")));
            }
            if let Some(d) = r.delta {
                if !(d > 0.0) || !d.is_finite() {
                    return Err(Error::RegionGeoJson(format!("region {i} has non-positive delta {d}")));
                }
            }
        }
        for (i, g) in self.obstacles.iter().enumerate() {
            if let Geometry::Polygon(p) = g {
                if !p.is_simple() {
                    return Err(Error::RegionGeoJson(format!("obstacle {i} is self-intersecting")));
                }
            }
        }
        Ok(())
    }

    pub fn regions_envelope(&self) -> Option<Rect> {
        self.regions
            .iter()
            .filter_map(|r| r.polygon.bbox())
            .reduce(|a, b| a.union(&b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtentMode {
    /// Envelope of the input points, padded by half a cell on every side.
    #[default]
    Points,
    /// Envelope of the region polygons.
    Regions,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridConfig {
    pub extent_mode: ExtentMode,
    /// Overrides the automatic resolution when set.
    pub resolution: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    Normal,
    Obstacle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellRole {
    Plain,
    Origin,
    /// Index into `NodeSet::destinations`.
    Destination(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellInfo {
    pub kind: CellKind,
    pub weight: f64,
    pub role: CellRole,
}

impl Default for CellInfo {
    fn default() -> Self {
        Self { kind: CellKind::Normal, weight: 1.0, role: CellRole::Plain }
    }
}

/// The rasterised mapping space. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpace {
    resolution: f64,
    extent: Rect,
    nrows: usize,
    ncols: usize,
    cells: Vec<CellInfo>,
    origin_cell: Cell,
    destination_cells: Vec<Cell>,
}

/// Mean of the smallest ⌈5%⌉ pairwise distances over origin and
/// destinations, divided by four. At least one pair is always used.
pub fn compute_resolution(nodes: &NodeSet) -> Result<f64> {
    let pts = nodes.labelled_points();
    if pts.len() < 2 {
        return Err(Error::InvalidNodes("at least two points required".into()));
    }
    let mut dists = Vec::with_capacity(pts.len() * (pts.len() - 1) / 2);
    for (i, (a, pa)) in pts.iter().enumerate() {
        for (b, pb) in &pts[i + 1..] {
            let d = pa.dist(*pb);
            if d == 0.0 {
                return Err(Error::DuplicatePoints(a.to_string(), b.to_string()));
            }
            dists.push(d);
        }
    }
    dists.sort_by(f64::total_cmp);
    let take = ((dists.len() as f64 * 0.05).ceil() as usize).max(1);
    let mean = dists[..take].iter().sum::<f64>() / take as f64;
    Ok(mean / 4.0)
}

/// Rasterise the mapping space.
pub fn build_grid(nodes: &NodeSet, regions: &RegionSet, cfg: &GridConfig) -> Result<GridSpace> {
    nodes.validate()?;
    regions.validate()?;
    let rs = match cfg.resolution {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::Config(format!("resolution must be positive, got {r}"))),
        None => compute_resolution(nodes)?,
    };

    let (extent, ncols, nrows) = match cfg.extent_mode {
        ExtentMode::Points => {
            let env = Rect::envelope(nodes.labelled_points().into_iter().map(|(_, p)| p))
                .expect("node set is non-empty");
            let ncols = cells_spanning(env.width() + rs, rs);
            let nrows = cells_spanning(env.height() + rs, rs);
            let min = Point::new(env.min.x - 0.5 * rs, env.min.y - 0.5 * rs);
            let max = Point::new(min.x + ncols as f64 * rs, min.y + nrows as f64 * rs);
            (Rect::new(min, max), ncols, nrows)
        }
        ExtentMode::Regions => {
            let env = regions
                .regions_envelope()
                .ok_or_else(|| Error::Config("extent mode 'regions' needs at least one region".into()))?;
            let ncols = cells_spanning(env.width(), rs);
            let nrows = cells_spanning(env.height(), rs);
            let max = Point::new(env.min.x + ncols as f64 * rs, env.min.y + nrows as f64 * rs);
            (Rect::new(env.min, max), ncols, nrows)
        }
    };

    let mut gs = GridSpace {
        resolution: rs,
        extent,
        nrows,
        ncols,
        cells: vec![CellInfo::default(); nrows * ncols],
        origin_cell: Cell::new(0, 0),
        destination_cells: Vec::new(),
    };

    // Overlapping weighted regions: the heaviest weight wins.
    let mut deltas: Vec<Option<f64>> = vec![None; gs.cells.len()];
    for region in &regions.regions {
        let Some(delta) = region.delta else { continue };
        let Some(bbox) = region.polygon.bbox() else { continue };
        for cell in gs.cells_overlapping(&bbox) {
            if region.polygon.contains(gs.cell_center(cell)) {
                let slot = &mut deltas[gs.index(cell)];
                *slot = Some(slot.map_or(delta, |d| d.max(delta)));
            }
        }
    }
    for (info, delta) in gs.cells.iter_mut().zip(deltas) {
        if let Some(d) = delta {
            info.weight = d;
        }
    }

    for obstacle in &regions.obstacles {
        let Some(bbox) = obstacle.bbox() else { continue };
        for cell in gs.cells_overlapping(&bbox) {
            if obstacle.blocks(&gs.cell_rect(cell)) {
                let idx = gs.index(cell);
                gs.cells[idx].kind = CellKind::Obstacle;
            }
        }
    }

    let mut owner: HashMap<Cell, String> = HashMap::new();
    let mut place = |gs: &mut GridSpace, id: &str, p: Point, role: CellRole| -> Result<Cell> {
        let cell = gs.locate_cell(p)?;
        if let Some(prev) = owner.insert(cell, id.to_string()) {
            return Err(Error::ResolutionTooCoarse(prev, id.to_string()));
        }
        let idx = gs.index(cell);
        if gs.cells[idx].kind == CellKind::Obstacle {
            return Err(Error::PointInObstacle(id.to_string()));
        }
        gs.cells[idx].role = role;
        Ok(cell)
    };
    gs.origin_cell = place(&mut gs, &nodes.origin_id, nodes.origin, CellRole::Origin)?;
    for (i, d) in nodes.destinations.iter().enumerate() {
        let cell = place(&mut gs, &d.id, d.position, CellRole::Destination(i))?;
        gs.destination_cells.push(cell);
    }
    Ok(gs)
}

fn cells_spanning(length: f64, rs: f64) -> usize {
    // Absorb rounding noise so an exact multiple does not gain a column.
    let n = (length / rs - 1e-9).ceil();
    (n as usize).max(1)
}

impl GridSpace {
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn extent(&self) -> Rect {
        self.extent
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn origin_cell(&self) -> Cell {
        self.origin_cell
    }

    /// Destination cells, indexed like `NodeSet::destinations`.
    pub fn destination_cells(&self) -> &[Cell] {
        &self.destination_cells
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.ncols + cell.col
    }

    #[inline]
    pub fn cell_of(&self, index: usize) -> Cell {
        Cell::new(index / self.ncols, index % self.ncols)
    }

    pub fn info(&self, cell: Cell) -> &CellInfo {
        &self.cells[self.index(cell)]
    }

    pub fn weight(&self, cell: Cell) -> f64 {
        self.info(cell).weight
    }

    pub fn is_obstacle(&self, cell: Cell) -> bool {
        self.info(cell).kind == CellKind::Obstacle
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.nrows && cell.col < self.ncols
    }

    /// Cell at signed coordinates, if inside the grid.
    pub fn checked_cell(&self, row: i64, col: i64) -> Option<Cell> {
        (row >= 0 && col >= 0 && (row as usize) < self.nrows && (col as usize) < self.ncols)
            .then(|| Cell::new(row as usize, col as usize))
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cells.len()).map(|i| self.cell_of(i))
    }

    pub fn cell_rect(&self, cell: Cell) -> Rect {
        let rs = self.resolution;
        let min = Point::new(
            self.extent.min.x + cell.col as f64 * rs,
            self.extent.min.y + cell.row as f64 * rs,
        );
        Rect::new(min, Point::new(min.x + rs, min.y + rs))
    }

    pub fn cell_center(&self, cell: Cell) -> Point {
        let rs = self.resolution;
        Point::new(
            self.extent.min.x + (cell.col as f64 + 0.5) * rs,
            self.extent.min.y + (cell.row as f64 + 0.5) * rs,
        )
    }

    /// Cell containing `p`. A point on a shared border belongs to the cell
    /// with the lower row/column index.
    pub fn locate_cell(&self, p: Point) -> Result<Cell> {
        if !self.extent.contains_closed(p) {
            return Err(Error::OutOfExtent { x: p.x, y: p.y });
        }
        let axis = |v: f64, lo: f64, n: usize| -> usize {
            let k = ((v - lo) / self.resolution).ceil() as i64 - 1;
            k.clamp(0, n as i64 - 1) as usize
        };
        Ok(Cell::new(
            axis(p.y, self.extent.min.y, self.nrows),
            axis(p.x, self.extent.min.x, self.ncols),
        ))
    }

    /// Cells whose squares meet the closed rectangle `r` (clipped to the grid).
    pub fn cells_overlapping(&self, r: &Rect) -> Vec<Cell> {
        let rs = self.resolution;
        let span = |lo: f64, hi: f64, origin: f64, n: usize| -> Option<(usize, usize)> {
            let a = ((lo - origin) / rs).floor() as i64 - 1;
            let b = ((hi - origin) / rs).floor() as i64 + 1;
            let a = a.max(0);
            let b = b.min(n as i64 - 1);
            (a <= b).then_some((a as usize, b as usize))
        };
        let (Some((r0, r1)), Some((c0, c1))) = (
            span(r.min.y, r.max.y, self.extent.min.y, self.nrows),
            span(r.min.x, r.max.x, self.extent.min.x, self.ncols),
        ) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity((r1 - r0 + 1) * (c1 - c0 + 1));
        for row in r0..=r1 {
            for col in c0..=c1 {
                out.push(Cell::new(row, col));
            }
        }
        out
    }

    pub fn obstacle_count(&self) -> usize {
        self.cells.iter().filter(|c| c.kind == CellKind::Obstacle).count()
    }

    /// Build a grid directly from parts. Used by tests and synthetic fixtures
    /// that need exact control over cell placement.
    pub fn from_parts(
        resolution: f64,
        extent_min: Point,
        nrows: usize,
        ncols: usize,
        origin: Cell,
        destinations: &[Cell],
    ) -> Result<Self> {
        if !(resolution > 0.0) || nrows == 0 || ncols == 0 {
            return Err(Error::Config("grid needs positive resolution and size".into()));
        }
        let extent = Rect::new(
            extent_min,
            Point::new(extent_min.x + ncols as f64 * resolution, extent_min.y + nrows as f64 * resolution),
        );
        let mut gs = GridSpace {
            resolution,
            extent,
            nrows,
            ncols,
            cells: vec![CellInfo::default(); nrows * ncols],
            origin_cell: origin,
            destination_cells: destinations.to_vec(),
        };
        let mut seen = HashMap::new();
        for (i, &c) in std::iter::once(&origin).chain(destinations).enumerate() {
            if !gs.contains(c) {
                return Err(Error::CellOutOfBounds { row: c.row as i64, col: c.col as i64 });
            }
            if let Some(prev) = seen.insert(c, i) {
                return Err(Error::ResolutionTooCoarse(format!("#{prev}"), format!("#{i}")));
            }
        }
        let oi = gs.index(origin);
        gs.cells[oi].role = CellRole::Origin;
        for (i, &c) in destinations.iter().enumerate() {
            let idx = gs.index(c);
            gs.cells[idx].role = CellRole::Destination(i);
        }
        Ok(gs)
    }

    /// Mark a cell as an obstacle. Fails on origin/destination cells.
    pub fn set_obstacle(&mut self, cell: Cell) -> Result<()> {
        let idx = self.index(cell);
        if self.cells[idx].role != CellRole::Plain {
            return Err(Error::PointInObstacle(format!("cell {cell}")));
        }
        self.cells[idx].kind = CellKind::Obstacle;
        Ok(())
    }

    pub fn set_weight(&mut self, cell: Cell, weight: f64) {
        let idx = self.index(cell);
        self.cells[idx].weight = weight;
    }
}
