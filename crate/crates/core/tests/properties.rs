use fbpanel_core::identified::{check_point, true_psi, build_feasibility_lp, ExogeneityMode, PsiLayout, SetOptions};
use fbpanel_core::{compute_q, FeedbackProcess, HeterogeneityDist, HeterogeneityGrid, HistoryIndex, Link};
use proptest::prelude::*;

fn link_strategy() -> impl Strategy<Value = Link> {
    prop_oneof![Just(Link::Logit), Just(Link::Probit), Just(Link::Exponential)]
}

prop_compose! {
    fn model_strategy()(periods in 2usize..=3, k in 1usize..=4, link in link_strategy(), theta in -1.5f64..1.5, seed in any::<u64>())
        -> (usize, Link, f64, HeterogeneityGrid, HeterogeneityDist, FeedbackProcess) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let base = if link == Link::Exponential { 1.6 } else { -1.0 };
        let points: Vec<f64> = (0..k).map(|i| base + 0.7 * i as f64).collect();
        let grid = HeterogeneityGrid::new(points).unwrap();
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s).collect::<Vec<_>>()
        };
        let (w0, w1) = (draw(&mut rng), draw(&mut rng));
        let pi = HeterogeneityDist::new(w0, w1).unwrap();
        let feedback = FeedbackProcess::from_fn(periods, k, |_, _, _, _| rng.random_range(0.05..0.95)).unwrap();
        (periods, link, theta, grid, pi, feedback)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outcome_blocks_are_distributions((_, link, theta, grid, pi, feedback) in model_strategy(), q1 in 0.05f64..0.95) {
        let q = compute_q(theta, link, &grid, &pi, &feedback, [1.0 - q1, q1]).unwrap();
        let sums = q.block_sums();
        prop_assert!((sums[0] - 1.0).abs() < 1e-12 && (sums[1] - 1.0).abs() < 1e-12);
        prop_assert!(q.stacked().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn truth_is_feasible_and_satisfies_every_row((_, link, theta, grid, pi, feedback) in model_strategy()) {
        let q = compute_q(theta, link, &grid, &pi, &feedback, [0.5, 0.5]).unwrap();
        let pre = check_point(theta, &q, link, &grid, ExogeneityMode::Predetermined, &SetOptions::default()).unwrap();
        prop_assert!(pre.feasible);
        let psi = true_psi(theta, link, &grid, &pi, &feedback).unwrap();
        let lp = build_feasibility_lp(theta, &q, link, &grid, ExogeneityMode::Predetermined).unwrap();
        prop_assert!(lp.max_residual(&psi) < 1e-12);
    }

    #[test]
    fn exogenous_truth_is_strictly_feasible(
        (periods, link, theta, grid, pi, _) in model_strategy(),
        g in prop::collection::vec(0.05f64..0.95, 64),
    ) {
        // Feedback that ignores lagged outcomes.
        let k = grid.len();
        let feedback = FeedbackProcess::from_fn(periods, k, |t, _, xs, kk| {
            let code: usize = xs.iter().enumerate().map(|(s, &x)| (x as usize) << s).sum();
            g[(t * 7 + code * 3 + kk) % g.len()]
        }).unwrap();
        prop_assert!(feedback.is_strictly_exogenous());
        let q = compute_q(theta, link, &grid, &pi, &feedback, [0.5, 0.5]).unwrap();
        let strict = check_point(theta, &q, link, &grid, ExogeneityMode::StrictlyExogenous, &SetOptions::default()).unwrap();
        prop_assert!(strict.feasible);
    }

    #[test]
    fn strict_membership_implies_predetermined((_, link, theta, grid, pi, feedback) in model_strategy(), shift in -0.5f64..0.5) {
        let q = compute_q(theta, link, &grid, &pi, &feedback, [0.5, 0.5]).unwrap();
        let candidate = theta + shift;
        prop_assume!(grid.check_domain(link, candidate).is_ok());
        let opts = SetOptions::default();
        let strict = check_point(candidate, &q, link, &grid, ExogeneityMode::StrictlyExogenous, &opts).unwrap();
        let pre = check_point(candidate, &q, link, &grid, ExogeneityMode::Predetermined, &opts).unwrap();
        prop_assert!(!strict.feasible || pre.feasible);
    }

    #[test]
    fn history_index_is_a_bijection(periods in 2usize..=6) {
        let index = HistoryIndex::new(periods).unwrap();
        for i in 0..index.len() {
            prop_assert_eq!(index.encode(&index.decode(i)), i);
        }
    }

    #[test]
    fn psi_layout_is_a_bijection(periods in 2usize..=4, k in 1usize..=5) {
        let layout = PsiLayout::new(periods, k).unwrap();
        for j in 0..layout.n_vars() {
            let (x1, sub, kk) = layout.decode(j);
            prop_assert_eq!(layout.index(x1, sub, kk), j);
        }
    }
}
