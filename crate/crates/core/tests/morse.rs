use proptest::prelude::*;

use conley_core::cubical::{build_transition_graph, EngineConfig, Grid, DEFAULT_BUDGET};
use conley_core::flow::{trapping_box, Model};
use conley_core::morse::{attractor_repeller_split, morse_decomposition, travel_equations, Polynomial};

fn ranks() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0i64..5, 1..4)
}

proptest! {
    #[test]
    fn travel_equations_are_identities(k in ranks(), c in ranks()) {
        for e in travel_equations(&k, &c).unwrap() {
            let rhs = e.global.add(&e.q.mul_one_plus_t()).add(&Polynomial::new(vec![e.remainder]));
            prop_assert_eq!(&rhs, &e.lhs);
            prop_assert_eq!(e.valid, e.remainder == 0 && e.q.is_nonnegative());
        }
    }
}

#[test]
fn morse_order_and_attractor_repeller_pairs() {
    let model = Model::normal_form(2, 1, 0.25).unwrap();
    let grid = Grid::new(trapping_box(&model).unwrap(), &[5, 5], DEFAULT_BUDGET).unwrap();
    let tg = build_transition_graph(&grid, &model, &EngineConfig::with_tau(4.0)).unwrap();
    let d = morse_decomposition(&tg, &[("Origin".into(), vec![0.0, 0.0])], true);
    let g = &d.graph;
    for &(a, b) in &g.edges {
        assert!(a < b && g.reaches(a, b) && !g.reaches(b, a));
    }
    assert!(d.equation().unwrap().valid);
    for s in g.minimal_nodes() {
        let (att, rep) = attractor_repeller_split(g, &tg, &[s]).unwrap();
        assert_eq!(att.overlap(&rep), 0);
        assert!(g.nodes[s].cubes.is_subset(&att));
    }
}
