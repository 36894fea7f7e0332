use proptest::prelude::*;

use conley_core::flow::{time_tau_map, IntegratorConfig, LorenzParams, Model};
use conley_core::symbolic::{
    descending_crossings, encode_symbols, find_periodic_orbit, refine_crossing, verify_word_realization, Orientation, OrbitConfig,
    SeedWindow, WordConfig,
};

fn cfg() -> IntegratorConfig {
    IntegratorConfig::adaptive(1e-11)
}

fn seed(r: f64, x: f64) -> Vec<f64> {
    vec![x, x, LorenzParams::classical(r).section_height()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refining_a_crossing_is_idempotent(r in 14.0f64..28.0, x in 0.5f64..8.0) {
        let m = Model::lorenz(r);
        let cr = descending_crossings(&m, &seed(r, x), 3, 60.0, &cfg()).unwrap();
        let h = LorenzParams::classical(r).section_height();
        for c in &cr {
            let once = refine_crossing(&m, c).unwrap();
            let twice = refine_crossing(&m, &once).unwrap();
            prop_assert!((once.state[2] - h).abs() < 1e-9);
            prop_assert!((once.time - twice.time).abs() < 1e-12);
        }
    }

    // (x, y, z) -> (-x, -y, z) swaps S and T
    #[test]
    fn mirror_seed_swaps_symbols(r in 14.0f64..28.0, x in 0.5f64..8.0) {
        let m = Model::lorenz(r);
        let a = descending_crossings(&m, &seed(r, x), 6, 80.0, &cfg()).unwrap();
        let b = descending_crossings(&m, &seed(r, -x), 6, 80.0, &cfg()).unwrap();
        let wa = encode_symbols(&a, Orientation::PositiveS).unwrap();
        let wb = encode_symbols(&b, Orientation::NegativeS).unwrap();
        prop_assert_eq!(wa.symbols, wb.symbols);
    }
}

#[test]
fn word_counts_grow_monotonically() {
    let wc = WordConfig { seeds: 4000, window: SeedWindow::Full, ..WordConfig::default() };
    let m = Model::lorenz(15.0);
    let counts: Vec<usize> = (1..=4).map(|k| verify_word_realization(&m, k, &wc).unwrap().words_found).collect();
    for w in counts.windows(2) {
        assert!(w[0] <= w[1] && w[1] <= 2 * w[0], "{counts:?}");
    }
}

#[test]
fn periodic_orbit_closes_under_reintegration() {
    let m = Model::lorenz(15.0);
    let o = find_periodic_orbit(&m, "ST", &OrbitConfig::default()).unwrap();
    assert!(o.residual <= 1e-8);
    let back = time_tau_map(&m, &o.point, o.period, &IntegratorConfig::adaptive(1e-12)).unwrap();
    let gap = back.iter().zip(&o.point).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-6, "gap {gap}");
}
