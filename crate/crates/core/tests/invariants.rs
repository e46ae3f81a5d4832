use eerlab::analysis::{batch_objective, exact_decomposition, FiniteLabelModel};
use eerlab::engine::{auc_simpson, compare_aucs, subsample, Outcome};
use eerlab::models::DirichletCategoricalModel;
use eerlab::posterior::{entropy, joint_entropy, mutual_information, PosteriorTensor};
use eerlab::strategies::{
    score_bald, score_eer_full, score_entropy_mc, score_mell, score_mell_information, score_mezl, select_top_k,
    LossKind, ScoreVector,
};
use proptest::prelude::*;

fn tensor_strategy() -> impl Strategy<Value = PosteriorTensor> {
    (1usize..=6, 3usize..=10, 2usize..=4).prop_flat_map(|(t, n, c)| {
        prop::collection::vec(0.0f64..1.0, t * n * c).prop_map(move |raw| {
            let mut probs = Vec::with_capacity(raw.len());
            for row in raw.chunks(c) {
                // Squaring pushes some rows close to one-hot.
                let w: Vec<f64> = row.iter().map(|v| v * v + 1e-12).collect();
                let z: f64 = w.iter().sum();
                probs.extend(w.iter().map(|v| v / z));
            }
            PosteriorTensor::new(t, n, c, probs).unwrap()
        })
    })
}

fn model_strategy() -> impl Strategy<Value = DirichletCategoricalModel> {
    (1usize..=6, 2usize..=3, any::<u64>(), prop::sample::select(vec![0.1, 1.0, 10.0]))
        .prop_map(|(m, c, seed, alpha)| DirichletCategoricalModel::random(4, c, m, alpha, seed).unwrap())
}

fn split(n: usize) -> (Vec<usize>, Vec<usize>) {
    let pool: Vec<usize> = (0..n / 2).collect();
    let val: Vec<usize> = (n / 2..n).collect();
    (pool, val)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn information_is_bounded_by_entropy(t in tensor_strategy()) {
        let n = t.points();
        for i in 0..n {
            let j = (i + 1) % n;
            let joint = t.pairwise_joint(i, j).unwrap();
            let mi = mutual_information(&joint);
            let hi = entropy(&t.marginal(i).unwrap());
            let hj = entropy(&t.marginal(j).unwrap());
            prop_assert!(mi >= 0.0);
            prop_assert!(mi <= hi.min(hj) + 1e-9);
            prop_assert!(joint_entropy(&joint) <= hi + hj + 1e-9);
        }
    }

    #[test]
    fn bald_between_zero_and_predictive_entropy(t in tensor_strategy()) {
        let pool: Vec<usize> = (0..t.points()).collect();
        let bald = score_bald(&t, &pool).unwrap();
        let ent = score_entropy_mc(&t, &pool).unwrap();
        for (b, e) in bald.scores().iter().zip(ent.scores()) {
            prop_assert!(*b >= 0.0 && *b <= e + 1e-9);
        }
    }

    #[test]
    fn mell_forms_differ_by_a_constant(t in tensor_strategy()) {
        let (pool, val) = split(t.points());
        let a = score_mell(&t, &pool, &val).unwrap();
        let b = score_mell_information(&t, &pool, &val).unwrap();
        let offset = a.scores()[0] - b.scores()[0];
        for (x, y) in a.scores().iter().zip(b.scores()) {
            prop_assert!((x - y - offset).abs() < 1e-9);
        }
        prop_assert!(b.scores().iter().all(|s| *s >= 0.0));
    }

    #[test]
    fn mell_matches_the_two_term_log_loss_reduction(t in tensor_strategy()) {
        let (pool, val) = split(t.points());
        let mell = score_mell_information(&t, &pool, &val).unwrap();
        let full = score_eer_full(&t, &pool, &val, LossKind::Log).unwrap();
        for (a, b) in mell.scores().iter().zip(full.scores()) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn mezl_score_bounds(t in tensor_strategy()) {
        let (pool, val) = split(t.points());
        let mezl = score_mezl(&t, &pool, &val).unwrap();
        let full = score_eer_full(&t, &pool, &val, LossKind::ZeroOne).unwrap();
        let n_val = val.len() as f64;
        for (s, r) in mezl.scores().iter().zip(full.scores()) {
            prop_assert!(*s <= n_val + 1e-9);
            prop_assert!(*r >= -1e-9);
        }
    }

    #[test]
    fn top_k_is_distinct_and_ordered(scores in prop::collection::vec(-5.0f64..5.0, 1..40), k in 1usize..50) {
        let sv = ScoreVector::from_scores(scores.clone()).unwrap();
        let batch = select_top_k(&sv, k).unwrap();
        prop_assert_eq!(batch.len(), k.min(scores.len()));
        prop_assert_eq!(batch.truncated, k > scores.len());
        let mut seen = batch.chosen.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), batch.len());
        prop_assert!(batch.rationale.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn decomposition_identity_on_random_models(m in model_strategy(), i in 0usize..4, j in 0usize..4) {
        let r = exact_decomposition(&m, i, j).unwrap();
        prop_assert!(r.violation <= 1e-9, "{r:?}");
        prop_assert!(r.labels >= -1e-9 && r.residual >= -1e-9);
    }

    #[test]
    fn batch_objective_never_increases_with_more_labels(m in model_strategy(), order in Just(vec![0usize, 1, 2])) {
        let val = [3];
        let mut prev = batch_objective(&m, &[], &val).unwrap();
        for k in 1..=order.len() {
            let f = batch_objective(&m, &order[..k], &val).unwrap();
            prop_assert!(f <= prev + 1e-9);
            prev = f;
        }
        prop_assert_eq!(m.points(), 4);
    }

    #[test]
    fn simpson_is_exact_on_lines(a in -3.0f64..3.0, b in -3.0f64..3.0, steps in prop::collection::vec(0.1f64..5.0, 1..10)) {
        let mut xs = vec![0.0];
        for s in &steps {
            xs.push(xs[xs.len() - 1] + s);
        }
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let auc = auc_simpson(&xs, &ys).unwrap();
        let trap: f64 = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0).sum::<f64>()
            / (xs[xs.len() - 1] - xs[0]);
        prop_assert!((auc.value - trap).abs() < 1e-9);
    }

    #[test]
    fn comparison_is_antisymmetric(a in prop::collection::vec(0.0f64..1.0, 2..6), b in prop::collection::vec(0.0f64..1.0, 2..6)) {
        let ab = compare_aucs(&a, &b).unwrap();
        let ba = compare_aucs(&b, &a).unwrap();
        let flipped = match ab { Outcome::Win => Outcome::Loss, Outcome::Loss => Outcome::Win, Outcome::Tie => Outcome::Tie };
        prop_assert_eq!(ba, flipped);
        prop_assert_eq!(compare_aucs(&a, &a).unwrap(), Outcome::Tie);
    }

    #[test]
    fn subsample_is_an_ordered_subset(n in 0usize..60, m in 0usize..80, seed in any::<u64>()) {
        let idx: Vec<usize> = (0..n).map(|i| 3 * i + 1).collect();
        let (sub, flagged) = subsample(&idx, m, seed);
        prop_assert_eq!(sub.len(), m.min(n));
        prop_assert_eq!(flagged, m > n);
        prop_assert!(sub.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(sub.iter().all(|s| idx.contains(s)));
    }
}
