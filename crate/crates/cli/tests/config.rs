use proptest::prelude::*;

use conley_cli::config::{ModelKind, RunConfig};

fn config() -> impl Strategy<Value = RunConfig> {
    (any::<bool>(), 0.0f64..100.0, prop::collection::vec(1u32..10, 3), 0.01f64..2.0, 1.0f64..3.0, any::<u32>(), 1usize..20, prop::option::of(0usize..16))
        .prop_map(|(nf, r, depths, tau, bloat, seed, steps, threads)| {
            let mut c = RunConfig { r, depths, tau, bloat_factor: bloat, seed: u64::from(seed), ..RunConfig::default() };
            c.sweep.steps = steps;
            c.threads = threads.unwrap_or(0);
            if nf {
                c.model = ModelKind::NormalForm;
                c.normal_form.n = 3;
            }
            c
        })
}

proptest! {
    #[test]
    fn toml_round_trip_is_idempotent(c in config()) {
        let text = c.to_toml();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_toml(), text);
    }
}

#[test]
fn unknown_keys_and_bad_values_are_rejected() {
    assert!(RunConfig::parse("depth = [7, 7, 7]").is_err());
    assert!(RunConfig::parse("[sweep]\nstart = 1.0").is_err());
    assert!(RunConfig::parse("tau = -1.0").is_err());
    assert!(RunConfig::parse("depths = [7, 7]").is_err());
    assert!(RunConfig::parse("seed = 18446744073709551615").is_err());
    assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
}

#[test]
fn sweep_values_include_both_ends() {
    let c = RunConfig::parse("[sweep]\nr_start = 14.0\nr_end = 15.0\nsteps = 5").unwrap();
    assert_eq!(c.sweep_values(), vec![14.0, 14.25, 14.5, 14.75, 15.0]);
}
