//! Monte Carlo estimates against exact finite-support values.

use eerlab::models::{BayesianClassifier, DirichletCategoricalModel, DropoutMlp, MlpConfig};
use eerlab::strategies::{score_bald, score_mell, score_mezl};
use ndarray::array;

fn model() -> DirichletCategoricalModel {
    DirichletCategoricalModel::random(6, 3, 5, 1.0, 11).unwrap()
}

#[test]
fn marginals_and_joints_converge() {
    let m = model();
    let cells: Vec<usize> = (0..6).collect();
    let t = m.sample_tensor(&cells, 20_000, 1).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..6 {
        let exact = m.exact_predictive(i).unwrap();
        let mc = t.marginal(i).unwrap();
        for (a, b) in exact.probs().iter().zip(mc.probs()) {
            worst = worst.max((a - b).abs());
        }
        for j in 0..6 {
            let exact = m.exact_pairwise_joint(i, j).unwrap();
            let mc = t.pairwise_joint(i, j).unwrap();
            for (a, b) in exact.probs().iter().zip(mc.probs()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    assert!(worst < 0.02, "max abs error {worst}");
}

#[test]
fn scores_converge() {
    let m = model();
    let pool = [0, 1, 2];
    let val = [3, 4, 5];
    let t = m.sample_tensor(&[0, 1, 2, 3, 4, 5], 20_000, 2).unwrap();
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 0.03);
    assert!(close(score_mell(&t, &pool, &val).unwrap().scores(), &m.exact_mell(&pool, &val).unwrap()));
    assert!(close(score_mezl(&t, &pool, &val).unwrap().scores(), &m.exact_mezl(&pool, &val).unwrap()));
    assert!(close(score_bald(&t, &pool).unwrap().scores(), &m.exact_bald(&pool).unwrap()));
}

#[test]
fn dropout_posterior_is_seeded_and_varies_across_draws() {
    let mut mlp =
        DropoutMlp::new(2, 2, MlpConfig { hidden: vec![8], iterations: 50, ..MlpConfig::default() }, 0).unwrap();
    let x = array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [-1.0, -2.0]];
    mlp.fit(x.view(), &[0, 1, 1, 0]).unwrap();
    let a = mlp.posterior_predictive(x.view(), 16, 9).unwrap();
    assert_eq!(a, mlp.posterior_predictive(x.view(), 16, 9).unwrap());
    assert_ne!(a, mlp.posterior_predictive(x.view(), 16, 10).unwrap());
    assert!(a.validate().is_ok());
    let first = a.row(0, 0).to_vec();
    assert!((1..16).any(|t| a.row(t, 0) != first.as_slice()));
}
