use fpt_core::estimators::{delayed_eta, run_sequential_mmse, EstimatorKind, StoppingRule};
use fpt_core::montecarlo::{run_coupled_rules, run_coupled_trial};
use fpt_core::process::{advance, simulate_first_passage, PathState};
use fpt_core::theory::{lower_tail_bound, upper_tail_bound};
use fpt_core::{TrialStreams, WalkParams};
use proptest::prelude::*;

/// Records every observation it is fed and never stops on its own.
#[derive(Default)]
struct Probe {
    seen: Vec<(u64, f64)>,
}

impl StoppingRule for Probe {
    fn observe(&mut self, t: u64, y: f64) -> Option<u64> {
        self.seen.push((t, y));
        None
    }
}

proptest! {
    #[test]
    fn passage_is_monotone_in_level(
        draws in prop::collection::vec(-3.0f64..3.0, 400),
        s in 0.1f64..2.0,
        ell in 0.0f64..50.0,
        bump in 0.0f64..20.0,
    ) {
        let lo = WalkParams::delayed(s, ell, 0).unwrap().with_horizon_cap(400).unwrap();
        let hi = lo.with_level(ell + bump).unwrap();
        let a = simulate_first_passage(&lo, &draws).unwrap();
        let b = simulate_first_passage(&hi, &draws).unwrap();
        prop_assert!(a.tau <= b.tau);
        if !a.truncated {
            prop_assert!(a.overshoot >= 0.0);
        }
    }

    #[test]
    fn coupled_trials_replay(seed: u64, trial in 0u64..1000, ell in 5.0f64..300.0) {
        let params = WalkParams::noisy(5.0, ell, 0.5).unwrap();
        let kinds = [
            EstimatorKind::SequentialMmse,
            EstimatorKind::SingleObservation { q: 0.51 },
            EstimatorKind::FixedTime,
        ];
        let a = run_coupled_trial(&params, &kinds, &mut TrialStreams::for_trial(seed, 3, trial)).unwrap();
        let b = run_coupled_trial(&params, &kinds, &mut TrialStreams::for_trial(seed, 3, trial)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|o| o.tau == a[0].tau));
    }

    #[test]
    fn noiseless_mmse_rule_is_exact(seed: u64, ell in 0.0f64..500.0, s in 0.5f64..20.0) {
        let params = WalkParams::noisy(s, ell, 0.0).unwrap();
        let out = run_coupled_trial(
            &params,
            &[EstimatorKind::SequentialMmse],
            &mut TrialStreams::for_trial(seed, 0, 0),
        ).unwrap();
        prop_assert_eq!(out[0].eta, out[0].tau);
        prop_assert_eq!(out[0].abs_error(), 0);
    }

    #[test]
    fn driftless_delay_error_is_the_delay(seed: u64, d in 0u64..30, ell in 0.5f64..20.0) {
        let params = WalkParams::delayed(0.0, ell, d).unwrap().with_horizon_cap(100_000).unwrap();
        let out = run_coupled_trial(
            &params,
            &[EstimatorKind::DelayedThreshold],
            &mut TrialStreams::for_trial(seed, 0, 0),
        ).unwrap();
        if !out[0].truncated {
            prop_assert_eq!(out[0].eta, out[0].tau + d);
        }
    }

    #[test]
    fn delayed_rule_is_a_shifted_passage(
        draws in prop::collection::vec(-2.0f64..2.0, 600),
        s in 0.2f64..3.0,
        d in 0u64..40,
        base in 0.0f64..60.0,
    ) {
        let ell = base + s * d as f64;
        let params = WalkParams::delayed(s, ell, d).unwrap().with_horizon_cap(500).unwrap();
        let mut xs = vec![0.0];
        let mut state = PathState::ORIGIN;
        for &v in &draws {
            state = advance(state, &params, v, 0.0);
            xs.push(state.x);
        }
        let observations = (0..=500u64).map(|t| {
            let y = if t <= d { 0.0 } else { xs[(t - d) as usize] };
            (t, y)
        });
        let decision = delayed_eta(&params, observations).unwrap();
        let shifted = params.with_level(ell - s * d as f64).unwrap();
        let passage = simulate_first_passage(&shifted, &draws).unwrap();
        if !decision.stopped_by_cap && !passage.truncated {
            prop_assert_eq!(decision.eta, passage.tau + d);
        }
    }

    #[test]
    fn tail_bounds_are_probabilities(
        ell in 1.0f64..5000.0,
        s in 0.5f64..20.0,
        sigma2 in 0.1f64..4.0,
        frac in 0.0f64..0.99,
        step in 0.0f64..0.5,
    ) {
        let z = frac * ell / s;
        let z2 = (z + step * ell / s).min(0.995 * ell / s);
        let lo = lower_tail_bound(ell, s, sigma2, z).unwrap();
        let lo2 = lower_tail_bound(ell, s, sigma2, z2.max(z)).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(lo2 <= lo);
        let up = upper_tail_bound(ell, s, sigma2, z).unwrap();
        let up2 = upper_tail_bound(ell, s, sigma2, z + step * 10.0).unwrap();
        prop_assert!((0.0..=1.0).contains(&up));
        prop_assert!(up2 <= up);
    }
}

/// Every rule in a trial sees the same observations, the observations come
/// from the latent path the passage time is measured on, and the estimators'
/// decisions are functions of the observations alone.
#[test]
fn coupling_and_measurability() {
    let params = WalkParams::noisy(2.0, 60.0, 0.7)
        .unwrap()
        .with_horizon_cap(80)
        .unwrap();
    for trial in 0..200 {
        let mut p1 = Probe::default();
        let mut p2 = Probe::default();
        let mut mmse = EstimatorKind::SequentialMmse.rule(&params).unwrap();
        let mut rules: Vec<&mut dyn StoppingRule> = vec![&mut p1, mmse.as_mut(), &mut p2];
        let (passage, decisions) = run_coupled_rules(
            &params,
            &mut rules,
            &mut TrialStreams::for_trial(9, 1, trial),
        )
        .unwrap();
        assert_eq!(p1.seen, p2.seen);
        assert_eq!(p1.seen.len(), 81);

        // Replay the streams by hand.
        let mut streams = TrialStreams::for_trial(9, 1, trial);
        let mut state = PathState::ORIGIN;
        let mut tau = None;
        for &(t, y) in &p1.seen[1..] {
            let v = streams.increment();
            let w = streams.noise();
            state = advance(state, &params, v, w);
            assert_eq!(state.t, t);
            assert_eq!(state.y.to_bits(), y.to_bits());
            if tau.is_none() && state.x >= params.ell {
                tau = Some(t);
            }
        }
        match tau {
            Some(t) => assert_eq!((passage.tau, passage.truncated), (t, false)),
            None => assert!(passage.truncated),
        }

        // The same observations alone reproduce the mmse decision.
        let replay = run_sequential_mmse(&params, p1.seen.iter().copied()).unwrap();
        assert_eq!(replay, decisions[1]);
    }
}
