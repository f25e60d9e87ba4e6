mod common;

use common::{default_params, oracle_best, replay_against_oracle, walk_down};
use flowgrid::fixtures::{mirror_fixture, random_fixture, small_fixture, Fixture};
use flowgrid::layout::LayoutParams;
use flowgrid::render::{accumulate, edge_extract, EdgeKind};
use flowgrid::search::{lattice_dir, potential_accumulation, vector_angle};
use flowgrid::{assign_all, CandidatePath, Cell, FlowNetwork, SearchContext, SearchParams};

fn layout_params(f: &Fixture, search: SearchParams) -> LayoutParams {
    LayoutParams { search, g_im: 10_000.0 * f.grid.resolution(), threads: 1 }
}

fn manual(dest: usize, cells: &[(usize, usize)]) -> CandidatePath {
    let cells: Vec<Cell> = cells.iter().map(|&(r, c)| Cell::new(r, c)).collect();
    CandidatePath {
        destination: dest,
        flow_in: *cells.last().unwrap(),
        cells,
        sub_pl1: 0.0,
        sub_pl2: 0.0,
        penalties: Vec::new(),
        pl: 0.0,
        direction_weight: 0.0,
        fallback: false,
    }
}

#[test]
fn search_matches_oracle_on_small_fixtures() {
    let mut compared = 0;
    for seed in 0..10 {
        let f = small_fixture(seed);
        for restrict in [true, false] {
            let mut p = default_params(&f.grid, &f.nodes);
            p.restrict_directions = restrict;
            let rep = replay_against_oracle(&f.grid, &f.nodes, &p, 10_000.0 * f.grid.resolution());
            assert!(rep.mismatches.is_empty(), "seed {seed} restrict {restrict}: {:?}", rep.mismatches);
            compared += rep.comparisons;
        }
    }
    assert!(compared > 50, "only {compared} comparisons");
}

#[test]
fn search_matches_oracle_with_strategies_off() {
    for seed in 10..20 {
        let f = small_fixture(seed);
        let mut p = default_params(&f.grid, &f.nodes);
        p.penalize_acute = seed % 2 == 0;
        p.penalize_short = seed % 3 != 0;
        p.exclude_destinations = seed % 4 != 0;
        p.order_by_accumulation = seed % 5 != 0;
        let rep = replay_against_oracle(&f.grid, &f.nodes, &p, 0.0);
        assert!(rep.mismatches.is_empty(), "seed {seed}: {:?}", rep.mismatches);
    }
}

#[test]
fn three_destinations_follow_greedy_rule() {
    // Origin in the middle; destinations on the west edge, north-west corner
    // and north edge. Rows grow northwards.
    let f = Fixture::new(
        "three",
        10,
        10,
        Cell::new(5, 5),
        &[(Cell::new(5, 0), 100.0), (Cell::new(9, 0), 50.0), (Cell::new(9, 5), 25.0)],
    );
    let p = default_params(&f.grid, &f.nodes);
    let g_im = 10_000.0 * f.grid.resolution();
    let rep = replay_against_oracle(&f.grid, &f.nodes, &p, g_im);
    assert!(rep.mismatches.is_empty(), "{:?}", rep.mismatches);
    assert_eq!(rep.ambiguous, 0);

    // The replay above checked each choice; pin the resulting order. The
    // corner is farthest, so it goes first as a Type 1 path.
    let layout = assign_all(&f.grid, &f.nodes, &layout_params(&f, p)).unwrap();
    let order: Vec<&str> = layout.log.iter().map(|r| r.destination.as_str()).collect();
    assert_eq!(order, ["d01", "d02", "d00"]);
    layout.network.validate_tree(&f.grid).unwrap();

    // The first commit is the largest importance among all three, checked
    // against every order the oracle could have produced.
    let net = FlowNetwork::new(&f.grid);
    let first: Vec<f64> = (0..3)
        .map(|d| {
            let a = oracle_best(&f.grid, &net, &p, d).unwrap().unwrap();
            let bonus = if a.minimizers.iter().all(|m| m.0 == f.grid.origin_cell()) { g_im } else { 0.0 };
            a.pl + bonus
        })
        .collect();
    let top = (0..3).max_by(|&a, &b| first[a].total_cmp(&first[b]).then(b.cmp(&a))).unwrap();
    assert_eq!(layout.log[0].destination, format!("d{top:02}"));
}

/// 7×7 grid, origin in the centre, A committed straight in along arm `k`
/// (a D8 code seen from the origin), B anywhere off that arm.
fn seven(k: usize, b: Cell) -> Option<(Fixture, FlowNetwork)> {
    let origin = Cell::new(3, 3);
    let (dr, dc) = flowgrid::search::D8[k];
    let arm: Vec<Cell> =
        (0..=3i64).rev().map(|s| Cell::new((3 + dr * s) as usize, (3 + dc * s) as usize)).collect();
    if arm.contains(&b) {
        return None;
    }
    let f = Fixture::new("seven", 7, 7, origin, &[(arm[0], 10.0), (b, 10.0)]);
    let mut net = FlowNetwork::new(&f.grid);
    let cells: Vec<(usize, usize)> = arm.iter().map(|c| (c.row, c.col)).collect();
    net.incorporate(&f.grid, &f.nodes, &manual(0, &cells)).unwrap();
    Some((f, net))
}

fn every_seven() -> impl Iterator<Item = (Fixture, FlowNetwork)> {
    (0..8).flat_map(|k| (0..49).filter_map(move |i| seven(k, Cell::new(i / 7, i % 7))))
}

fn own_angle(net: &FlowNetwork, c: &CandidatePath) -> f64 {
    let prev = c.cells[c.cells.len() - 2];
    match net.downstream(c.flow_in) {
        Some(d) => vector_angle(lattice_dir(c.flow_in, prev), lattice_dir(c.flow_in, d)),
        None => 180.0,
    }
}

#[test]
fn acute_merge_moves_to_obtuse_flow_in() {
    let (mut cases, mut further_along) = (0, 0);
    for (f, net) in every_seven() {
        let pf = potential_accumulation(&f.grid, &f.nodes, 4);
        let on = SearchParams { omega: 0.35, ..default_params(&f.grid, &f.nodes) };
        let off = SearchParams { penalize_acute: false, ..on };
        let free = SearchContext::new(&f.grid, &f.nodes, &net, &pf, off).find_best_path(1).unwrap();
        let got = SearchContext::new(&f.grid, &f.nodes, &net, &pf, on).find_best_path(1).unwrap();
        let b = f.grid.destination_cells()[1];
        assert_eq!(got.pl, oracle_best(&f.grid, &net, &on, 1).unwrap().unwrap().pl, "B at {b}");
        if own_angle(&net, &free) > on.t_a {
            continue;
        }
        cases += 1;
        assert!(own_angle(&net, &got) > on.t_a, "B at {b}");
        assert!(got.penalties.is_empty(), "B at {b}");
        assert!(got.pl >= free.pl && got.pl < free.pl + on.pl_pen, "B at {b}");
        if net.downstream(free.flow_in) == Some(got.flow_in) {
            further_along += 1;
        }
    }
    assert!(cases > 0, "no position gives an acute shortest merge");
    assert!(further_along > 0);
}

#[test]
fn lower_omega_flows_in_farther_up() {
    for (f, net) in every_seven() {
        let pf = potential_accumulation(&f.grid, &f.nodes, 4);
        let base = default_params(&f.grid, &f.nodes);
        let at = |omega: f64| {
            let p = SearchParams { omega, ..base };
            let c = SearchContext::new(&f.grid, &f.nodes, &net, &pf, p).find_best_path(1).unwrap();
            assert_eq!(c.pl, oracle_best(&f.grid, &net, &p, 1).unwrap().unwrap().pl);
            net.downstream_length(c.flow_in)
        };
        assert!(at(0.35) >= at(1.0), "B at {}", f.grid.destination_cells()[1]);
    }
}

#[test]
fn mirrored_inputs_give_mirrored_trees() {
    let params = |f: &Fixture| layout_params(f, default_params(&f.grid, &f.nodes));
    let a = mirror_fixture(false);
    let b = mirror_fixture(true);
    let la = assign_all(&a.grid, &a.nodes, &params(&a)).unwrap();
    let lb = assign_all(&b.grid, &b.nodes, &params(&b)).unwrap();
    let flip = |c: Cell| Cell::new(a.grid.nrows() - 1 - c.row, c.col);
    let mut pa: Vec<f64> = la.log.iter().map(|r| r.pl).collect();
    let mut pb: Vec<f64> = lb.log.iter().map(|r| r.pl).collect();
    pa.sort_by(f64::total_cmp);
    pb.sort_by(f64::total_cmp);
    assert_eq!(pa, pb);
    // Equal volumes leave the id tie-break to pick the first commit, and the
    // ids sit on opposite sides in the two inputs; the trees still mirror.
    let mut cells_a: Vec<(Cell, Option<Cell>)> =
        la.network.committed_cells().map(|c| (flip(c), la.network.downstream(c).map(flip))).collect();
    let mut cells_b: Vec<(Cell, Option<Cell>)> =
        lb.network.committed_cells().map(|c| (c, lb.network.downstream(c))).collect();
    cells_a.sort();
    cells_b.sort();
    assert_eq!(cells_a, cells_b);
}

#[test]
fn accumulation_equals_traced_sums() {
    let f = random_fixture(77);
    let p = default_params(&f.grid, &f.nodes);
    let layout = assign_all(&f.grid, &f.nodes, &layout_params(&f, p)).unwrap();
    let net = &layout.network;
    let acc = accumulate(&f.grid, net, &f.nodes);
    let mut traced = vec![0.0; f.grid.len()];
    for (d, &cell) in f.nodes.destinations.iter().zip(f.grid.destination_cells()) {
        let mut c = Some(cell);
        while let Some(x) = c {
            traced[f.grid.index(x)] += d.volume;
            c = net.downstream(x);
        }
    }
    for i in 0..f.grid.len() {
        assert!((acc[i] - traced[i]).abs() <= 1e-9 * traced[i].max(1.0), "cell {}", f.grid.cell_of(i));
    }
}

#[test]
fn network_lengths_match_tree_walk() {
    for seed in 0..5 {
        let f = random_fixture(seed);
        let p = default_params(&f.grid, &f.nodes);
        let layout = assign_all(&f.grid, &f.nodes, &layout_params(&f, p)).unwrap();
        for c in layout.network.committed_cells() {
            assert_eq!(layout.network.downstream_length(c), walk_down(&f.grid, &layout.network, c));
        }
    }
}

/// The textbook example tree: trunk J-G-C-B-A into origin A, branches D into
/// B, E into C (fed by F and H) and I into G.
#[test]
fn example_tree_edges_and_volumes() {
    let f = Fixture::new(
        "example",
        10,
        12,
        Cell::new(6, 0),
        &[
            (Cell::new(9, 3), 10.0),  // D
            (Cell::new(0, 6), 20.0),  // F
            (Cell::new(3, 9), 100.0), // H
            (Cell::new(9, 9), 100.0), // I
            (Cell::new(6, 11), 180.0), // J
        ],
    );
    let mut net = FlowNetwork::new(&f.grid);
    let paths: [(usize, &[(usize, usize)]); 5] = [
        (4, &[(6, 11), (6, 10), (6, 9), (6, 8), (6, 7), (6, 6), (6, 5), (6, 4), (6, 3), (6, 2), (6, 1), (6, 0)]),
        (3, &[(9, 9), (8, 9), (7, 9), (6, 9)]),
        (0, &[(9, 3), (8, 3), (7, 3), (6, 3)]),
        (1, &[(0, 6), (1, 6), (2, 6), (3, 6), (4, 6), (5, 6), (6, 6)]),
        (2, &[(3, 9), (3, 8), (3, 7), (3, 6)]),
    ];
    for (d, cells) in paths {
        net.incorporate(&f.grid, &f.nodes, &manual(d, cells)).unwrap();
    }
    net.validate_tree(&f.grid).unwrap();
    let acc = accumulate(&f.grid, &net, &f.nodes);
    let edges = edge_extract(&f.grid, &net, &acc);
    let hang = edges.iter().filter(|e| e.kind == EdgeKind::HangEdge).count();
    let inner = edges.iter().filter(|e| e.kind == EdgeKind::NonHangEdge).count();
    assert_eq!((hang, inner), (5, 4));

    let g = Cell::new(6, 9);
    let into_g: Vec<f64> = edges.iter().filter(|e| e.downstream_end() == g).map(|e| e.volume).collect();
    assert_eq!(into_g.len(), 2);
    assert!(into_g.contains(&100.0) && into_g.contains(&180.0));
    let cg = edges.iter().find(|e| e.upstream_end() == g).unwrap();
    assert_eq!(cg.volume, 280.0);
    assert_eq!(cg.downstream_end(), Cell::new(6, 6));
    assert_eq!(acc[f.grid.index(Cell::new(6, 0))], 410.0);
}
