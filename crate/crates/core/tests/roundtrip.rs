use proptest::prelude::*;

use rancher::io::{fmt_f64, parse_trajectory, trajectory_to_string};
use rancher::walk::{run_walk, SamplerMode, Trajectory, TrajectoryRow};

fn mode() -> impl Strategy<Value = SamplerMode> {
    prop_oneof![Just(SamplerMode::Direct), Just(SamplerMode::Rejection)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulated_walks_survive_csv(seed in any::<u64>(), steps in 0usize..400, mode in mode()) {
        let (_, t) = run_walk(steps, seed, mode).unwrap();
        let f = parse_trajectory(&trajectory_to_string(&t), "mem").unwrap();
        prop_assert_eq!(&f.trajectory.rows, &t.rows);
        prop_assert_eq!((f.header.seed, f.header.mode, f.header.steps), (seed, mode, steps));
        prop_assert!(f.issues().is_empty());
    }

    #[test]
    fn arbitrary_rows_survive_csv(
        xs in prop::collection::vec((any::<f64>(), any::<f64>(), 0.0f64..1e6, 0.0f64..7.0, 1u32..1000, any::<bool>()), 1..40)
    ) {
        let xs: Vec<_> = xs.into_iter().filter(|r| r.0.is_finite() && r.1.is_finite()).collect();
        prop_assume!(!xs.is_empty());
        let rows: Vec<TrajectoryRow> = xs
            .iter()
            .enumerate()
            .map(|(n, &(x, y, d, arc_len, trials, is_ladder))| TrajectoryRow {
                n, x, y, d, hull_size: n + 1, arc_len, trials, is_ladder,
            })
            .collect();
        let t = Trajectory { seed: 3, mode: SamplerMode::Rejection, rows, first_trials: None };
        let f = parse_trajectory(&trajectory_to_string(&t), "mem").unwrap();
        prop_assert_eq!(f.trajectory.rows, t.rows);
    }

    #[test]
    fn float_rendering_is_lossless(x in any::<f64>()) {
        prop_assume!(x.is_finite());
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
