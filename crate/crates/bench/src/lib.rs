//! Shared inputs for the layout benchmarks.

use flowgrid::fixtures::{random_fixture, Fixture, US_STATES_CSV};
use flowgrid::NodeSet;

pub fn us_states() -> NodeSet {
    flowgrid::io::parse_nodes(US_STATES_CSV).expect("bundled fixture parses")
}

/// Random fixtures of increasing size, one per seed.
pub fn random_set(seeds: &[u64]) -> Vec<Fixture> {
    seeds.iter().map(|&s| random_fixture(s)).collect()
}
