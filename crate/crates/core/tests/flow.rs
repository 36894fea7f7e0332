use proptest::prelude::*;

use conley_core::equilibria::{
    find_equilibria, heteroclinic_threshold, hopf_routh_hurwitz, hopf_threshold, pitchfork_threshold, EquilibriumLabel,
};
use conley_core::flow::{eval_field, eval_jacobian, time_tau_map, trapping_box, IntegratorConfig, LorenzParams, Model};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn equilibria_are_zeros_and_symmetric(r in 1.01f64..60.0) {
        let model = Model::lorenz(r);
        let eqs = find_equilibria(&LorenzParams::classical(r)).unwrap();
        prop_assert_eq!(eqs.len(), 3);
        for e in &eqs {
            let f = eval_field(&model, &e.state).unwrap();
            prop_assert!(f.iter().all(|v| v.abs() <= 1e-10 * r.max(1.0)));
        }
        let c1 = eqs.iter().find(|e| e.label == EquilibriumLabel::C1).unwrap();
        let c2 = eqs.iter().find(|e| e.label == EquilibriumLabel::C2).unwrap();
        prop_assert_eq!(c1.state[0], -c2.state[0]);
        prop_assert_eq!(c1.state[2], c2.state[2]);
        prop_assert_eq!(c1.unstable_dim, c2.unstable_dim);
    }

    // central differences of the field against the exact Jacobian
    #[test]
    fn jacobian_matches_differences(r in 0.5f64..40.0, x in prop::array::uniform3(-20.0f64..20.0)) {
        let m = Model::lorenz(r);
        let j = eval_jacobian(&m, &x).unwrap();
        let h = 1e-6;
        for k in 0..3 {
            let (mut a, mut b) = (x.to_vec(), x.to_vec());
            a[k] += h;
            b[k] -= h;
            let (fa, fb) = (eval_field(&m, &a).unwrap(), eval_field(&m, &b).unwrap());
            for i in 0..3 {
                prop_assert!(((fa[i] - fb[i]) / (2.0 * h) - j.get(i, k)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn flow_commutes_with_the_symmetry(r in 1.0f64..30.0, x in prop::array::uniform3(-10.0f64..10.0)) {
        let m = Model::lorenz(r);
        let cfg = IntegratorConfig::adaptive(1e-11);
        let y = time_tau_map(&m, &x, 0.5, &cfg).unwrap();
        let z = time_tau_map(&m, &[-x[0], -x[1], x[2]], 0.5, &cfg).unwrap();
        prop_assert!((y[0] + z[0]).abs() < 1e-9 && (y[1] + z[1]).abs() < 1e-9 && (y[2] - z[2]).abs() < 1e-9);
    }

    // the trapping box holds the flow forward
    #[test]
    fn box_is_forward_invariant(r in 0.5f64..40.0, u in prop::array::uniform3(0.0f64..1.0)) {
        let m = Model::lorenz(r);
        let b = trapping_box(&m).unwrap();
        let x: Vec<f64> = (0..3).map(|i| b.lo[i] + u[i] * (b.hi[i] - b.lo[i])).collect();
        let y = time_tau_map(&m, &x, 2.0, &IntegratorConfig::adaptive(1e-9)).unwrap();
        prop_assert!(b.contains(&y));
    }
}

#[test]
fn fixed_and_adaptive_steppers_agree() {
    let m = Model::lorenz(28.0);
    let x = [1.0, 2.0, 20.0];
    let a = time_tau_map(&m, &x, 1.0, &IntegratorConfig::adaptive(1e-12)).unwrap();
    let f = time_tau_map(&m, &x, 1.0, &IntegratorConfig::fixed(1e-3)).unwrap();
    assert!(a.iter().zip(&f).all(|(a, f)| (a - f).abs() < 1e-6));
}

#[test]
fn local_bifurcations() {
    assert!((pitchfork_threshold(1e-10).unwrap().r_star - 1.0).abs() < 1e-8);
    let h = hopf_threshold(1e-9).unwrap().r_star;
    assert!((h - 470.0 / 19.0).abs() < 1e-6);
    assert!((hopf_routh_hurwitz(10.0, 8.0 / 3.0) - h).abs() < 1e-6);
}

#[test]
fn absorption_bracket() {
    let t = heteroclinic_threshold(1e-2, &IntegratorConfig::threshold()).unwrap();
    assert!(t.bracket.0 >= 23.9 && t.bracket.1 <= 24.2, "{:?}", t.bracket);
}
