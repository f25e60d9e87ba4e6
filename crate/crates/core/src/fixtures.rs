//! Deterministic synthetic inputs for tests, benchmarks and examples.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;
use crate::grid::{Cell, Destination, GridSpace, NodeSet};

/// Resolution used by every synthetic lattice fixture.
pub const FIXTURE_RS: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub grid: GridSpace,
    pub nodes: NodeSet,
}

impl Fixture {
    /// Nodes sit on cell centres of a grid anchored at (0, 0).
    pub fn new(name: impl Into<String>, rows: usize, cols: usize, origin: Cell, dests: &[(Cell, f64)]) -> Self {
        let cells: Vec<Cell> = dests.iter().map(|d| d.0).collect();
        let grid = GridSpace::from_parts(FIXTURE_RS, Point::new(0.0, 0.0), rows, cols, origin, &cells)
            .expect("fixture cells are distinct and inside the grid");
        let destinations = dests
            .iter()
            .enumerate()
            .map(|(i, &(c, volume))| Destination { id: format!("d{i:02}"), position: grid.cell_center(c), volume })
            .collect();
        let nodes = NodeSet::new("origin", grid.cell_center(origin), destinations).expect("valid fixture nodes");
        Self { name: name.into(), grid, nodes }
    }

    pub fn with_obstacles(mut self, cells: impl IntoIterator<Item = Cell>) -> Self {
        for c in cells {
            self.grid.set_obstacle(c).expect("obstacle on a plain cell");
        }
        self
    }

    pub fn with_weight(mut self, cells: impl IntoIterator<Item = Cell>, weight: f64) -> Self {
        for c in cells {
            self.grid.set_weight(c, weight);
        }
        self
    }
}

fn random_cells(rng: &mut ChaCha8Rng, rows: usize, cols: usize, n: usize) -> Vec<Cell> {
    let mut out: Vec<Cell> = Vec::with_capacity(n);
    while out.len() < n {
        let c = Cell::new(rng.random_range(0..rows), rng.random_range(0..cols));
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

fn random_with(seed: u64, rows: std::ops::RangeInclusive<usize>, dests: std::ops::RangeInclusive<usize>) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nrows = rng.random_range(rows.clone());
    let ncols = rng.random_range(rows);
    let n = rng.random_range(dests);
    let cells = random_cells(&mut rng, nrows, ncols, n + 1);
    let dests: Vec<(Cell, f64)> = cells[1..]
        .iter()
        .map(|&c| (c, (rng.random_range(1.0..1000.0_f64) * 10.0).round() / 10.0))
        .collect();
    Fixture::new(format!("random-{seed}"), nrows, ncols, cells[0], &dests)
}

/// Grid between 20×20 and 60×60 with 3 to 15 destinations.
pub fn random_fixture(seed: u64) -> Fixture {
    random_with(seed, 20..=60, 3..=15)
}

/// Grid at most 15×15 with 2 to 6 destinations.
pub fn small_fixture(seed: u64) -> Fixture {
    random_with(seed, 8..=15, 2..=6)
}

pub fn random_battery(count: usize) -> Vec<Fixture> {
    (0..count as u64).map(|i| random_fixture(1000 + i)).collect()
}

/// A row of destinations on a straight line to the origin, so the far one
/// runs through the near ones unless destinations are excluded.
pub fn crowding_fixture() -> Fixture {
    Fixture::new(
        "crowding",
        9,
        24,
        Cell::new(4, 22),
        &[
            (Cell::new(4, 1), 40.0),
            (Cell::new(4, 7), 10.0),
            (Cell::new(4, 13), 10.0),
            (Cell::new(3, 18), 5.0),
            (Cell::new(7, 4), 20.0),
        ],
    )
}

/// Destinations crowded around the origin in a corner, where the cheapest
/// merges arrive at sharp angles unless those are penalised.
pub fn acute_fixture() -> Fixture {
    Fixture::new(
        "acute",
        8,
        12,
        Cell::new(0, 10),
        &[
            (Cell::new(2, 9), 571.6),
            (Cell::new(0, 9), 775.8),
            (Cell::new(4, 3), 704.3),
            (Cell::new(6, 3), 254.1),
            (Cell::new(1, 8), 462.9),
        ],
    )
}

fn wall_cells() -> impl Iterator<Item = Cell> {
    (4..26).map(|r| Cell::new(r, 16))
}

fn wall_nodes(name: &str) -> Fixture {
    Fixture::new(
        name,
        30,
        32,
        Cell::new(15, 30),
        &[
            (Cell::new(15, 2), 50.0),
            (Cell::new(8, 5), 20.0),
            (Cell::new(22, 4), 30.0),
            (Cell::new(12, 10), 10.0),
            (Cell::new(20, 12), 15.0),
        ],
    )
}

/// Destinations west of a north–south wall, origin east of it.
pub fn obstacle_fixture() -> Fixture {
    wall_nodes("obstacle-wall").with_obstacles(wall_cells())
}

/// The same nodes without the wall.
pub fn unmasked_wall_fixture() -> Fixture {
    wall_nodes("obstacle-free")
}

/// Cells covered by the central sea patch of [`sea_fixture`].
pub fn sea_cells() -> Vec<Cell> {
    (8..23).flat_map(|r| (10..26).map(move |c| Cell::new(r, c))).collect()
}

/// Destinations west of a sea patch that lies on the direct route; the sea
/// costs `delta` per unit length.
pub fn sea_fixture(delta: f64) -> Fixture {
    let f = Fixture::new(
        format!("sea-{delta}"),
        30,
        36,
        Cell::new(15, 34),
        &[
            (Cell::new(15, 2), 50.0),
            (Cell::new(11, 4), 20.0),
            (Cell::new(20, 5), 30.0),
            (Cell::new(26, 8), 10.0),
            (Cell::new(4, 6), 15.0),
        ],
    );
    f.with_weight(sea_cells(), delta)
}

/// Two destinations mirrored across the origin's row.
pub fn mirror_fixture(flip: bool) -> Fixture {
    let (a, b) = (Cell::new(12, 2), Cell::new(2, 2));
    let dests = if flip { [(b, 10.0), (a, 10.0)] } else { [(a, 10.0), (b, 10.0)] };
    Fixture::new("mirror", 15, 15, Cell::new(7, 13), &dests)
}

/// Node CSV of a synthetic 46-destination US out-migration table.
pub const US_STATES_CSV: &str = include_str!("../tests/fixtures/us_states_synthetic.csv");
