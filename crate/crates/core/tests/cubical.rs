use proptest::prelude::*;

use conley_core::cubical::{build_transition_graph, outer_map, EngineConfig, Grid, TransitionGraph, DEFAULT_BUDGET};
use conley_core::flow::{time_tau_map, trapping_box, IntegratorConfig, Model};

fn lorenz_grid(r: f64, depth: u32) -> (Model, Grid) {
    let model = Model::lorenz(r);
    let grid = Grid::new(trapping_box(&model).unwrap(), &[depth; 3], DEFAULT_BUDGET).unwrap();
    (model, grid)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // the cube of the true image lies among the successors
    #[test]
    fn outer_map_covers_images(r in 1.5f64..30.0, cube in 0u32..4096, u in prop::array::uniform3(0.0f64..1.0)) {
        let (model, grid) = lorenz_grid(r, 4);
        let cfg = EngineConfig::default();
        let (lo, hi) = grid.cube_bounds(cube);
        let x: Vec<f64> = (0..3).map(|i| lo[i] + u[i] * (hi[i] - lo[i])).collect();
        let y = time_tau_map(&model, &x, cfg.tau, &IntegratorConfig::adaptive(1e-10)).unwrap();
        let succ = outer_map(&grid, &model, cube, &cfg);
        match grid.cube_of_point(&y) {
            Some(c) => prop_assert!(succ.cubes.contains(c)),
            None => prop_assert!(succ.escapes),
        }
    }

    #[test]
    fn more_bloat_more_successors(r in 1.5f64..30.0, cube in 0u32..4096, extra in 0.0f64..2.0) {
        let (model, grid) = lorenz_grid(r, 4);
        let small = EngineConfig::default();
        let big = EngineConfig { bloat_factor: small.bloat_factor + extra, bloat_floor: small.bloat_floor + extra, ..small };
        let a = outer_map(&grid, &model, cube, &small);
        let b = outer_map(&grid, &model, cube, &big);
        prop_assert!(a.cubes.is_subset(&b.cubes));
        prop_assert!(!a.escapes || b.escapes);
    }
}

#[test]
fn builds_are_deterministic_and_dumps_round_trip() {
    let (model, grid) = lorenz_grid(28.0, 5);
    let cfg = EngineConfig::default();
    let a = build_transition_graph(&grid, &model, &cfg).unwrap();
    let b = build_transition_graph(&grid, &model, &cfg).unwrap();
    let dump = a.binary_dump();
    assert_eq!(dump, b.binary_dump());
    let back = TransitionGraph::read_binary(dump.as_slice()).unwrap();
    assert_eq!(back.binary_dump(), dump);
}

#[test]
fn invalid_engine_settings_are_rejected() {
    assert!(EngineConfig { bloat_factor: 0.5, ..EngineConfig::default() }.validate().is_err());
    assert!(EngineConfig::with_tau(0.0).validate().is_err());
}
