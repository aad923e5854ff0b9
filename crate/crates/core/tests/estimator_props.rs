use affixprod::estimator::{
    discretize, discretize_sequence, run_sequence, run_states, Priors, State, TransitionModel,
    SUM_TOLERANCE,
};
use proptest::prelude::*;

fn state() -> impl Strategy<Value = State> {
    (0usize..3).prop_map(|i| State::from_index(i).unwrap())
}

fn freqs() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(prop_oneof![Just(0u64), 0u64..5, 0u64..1000], 2..80)
}

proptest! {
    #[test]
    fn observing_a_row_leaves_others_untouched(history in prop::collection::vec((state(), state()), 0..30), prev in state(), next in state()) {
        let mut model = TransitionModel::new(&Priors::default()).unwrap();
        for (a, b) in history {
            model.observe_transition(a, b);
        }
        let before: Vec<[f64; 3]> = State::ALL.iter().map(|&r| model.predict_next(r).probs()).collect();
        model.observe_transition(prev, next);
        for r in State::ALL {
            if r != prev {
                let after = model.predict_next(r).probs();
                prop_assert!(after.iter().zip(before[r.index()]).all(|(x, y)| x.to_bits() == y.to_bits()));
            }
        }
    }

    #[test]
    fn no_lookahead(f in freqs(), cut in 2usize..80) {
        let cut = cut.min(f.len());
        let full = run_sequence(&f, &Priors::default(), 0.5).unwrap();
        let head = run_sequence(&f[..cut], &Priors::default(), 0.5).unwrap();
        prop_assert_eq!(&full.states[..cut], &head.states[..]);
        prop_assert_eq!(&full.trajectory[..cut - 1], &head.trajectory[..]);
    }

    #[test]
    fn online_states_match_recomputation(f in freqs(), q in 0.0f64..=1.0) {
        let online = discretize_sequence(&f, q).unwrap();
        for (t, &s) in online.iter().enumerate() {
            prop_assert_eq!(s, discretize(f[t], &f[..t], q).unwrap());
        }
    }

    #[test]
    fn trailing_absence_never_raises_productivity(mut f in freqs()) {
        if let Some(last) = f.last_mut() {
            *last = 0;
        }
        let before = run_sequence(&f, &Priors::default(), 0.5).unwrap().productivity;
        f.push(0);
        let after = run_sequence(&f, &Priors::default(), 0.5).unwrap().productivity;
        prop_assert!(after <= before + 1e-15, "{} > {}", after, before);
    }

    #[test]
    fn every_emitted_distribution_is_valid(states in prop::collection::vec(state(), 2..60), ess in 0.01f64..50.0) {
        let priors = Priors { ess, ..Priors::default() };
        let run = run_states(states, &priors).unwrap();
        for d in run.trajectory.iter().chain([&run.final_prediction, &run.initial.distribution()]) {
            let p = d.probs();
            prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE);
        }
        prop_assert!((run.productivity - (1.0 - run.final_prediction.p0())).abs() <= SUM_TOLERANCE);
    }
}
