use nvfield_cli::output::num;
use nvfield_cli::svg::{Chart, Series};
use nvfield_cli::RunConfig;
use proptest::prelude::*;

proptest! {
    #[test]
    fn numbers_keep_nine_significant_digits(v in prop::num::f64::NORMAL) {
        let back: f64 = num(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-9 * v.abs());
    }

    #[test]
    fn charts_stay_finite(points in prop::collection::vec((-1e9f64..1e9, -1e9f64..1e9), 0..40)) {
        let svg = Chart::new("t", "x", "y").with(Series::line("s", points)).render();
        prop_assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), trials in 1usize..10_000, omega in 0.1f64..100.0) {
        let mut c = RunConfig { seed, ..RunConfig::default() };
        c.dielectric.trials = trials;
        c.physics.omega_mhz = omega;
        let text = serde_json::to_string(&c).unwrap();
        prop_assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }
}
