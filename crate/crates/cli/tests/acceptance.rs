//! Acceptance criteria 1-12, one line each.
//!
//! Run with `cargo test -p eerlab-cli --test acceptance`. Criterion 12 only
//! gates when `EERLAB_GATE_TIMING=1`; otherwise its line is informational.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use eerlab::analysis::{decomposition_sweep, default_prop1, mezl_failure, xor_report};
use eerlab::engine::{aggregate, auc_simpson, compare_methods, run_sweep, ExperimentConfig, ExperimentResult, Outcome};
use eerlab::models::{DirichletCategoricalModel, DropoutMlp, MlpConfig};
use eerlab::posterior::{entropy, mutual_information, JointDistribution, PosteriorTensor};
use eerlab::seeding::{derive_seed, rng_from};
use eerlab::strategies::{
    score_bald, score_eer_full, score_mell, score_mezl, verify_optimal_prediction, LossKind, ScoreVector, Strategy,
};
use ndarray::Array2;
use rand::Rng;

/// Regression values for criterion 9, recorded from the first passing run.
const FROZEN_MELL_AUC: f64 = 0.923175;
const FROZEN_RANDOM_AUC: f64 = 0.9087583333333334;
const FROZEN_TOLERANCE: f64 = 1e-6;

struct Verdict {
    passed: bool,
    detail: String,
}

/// Name, check, gating.
type Criterion = (&'static str, fn() -> Verdict, bool);

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn random_simplex(rng: &mut impl Rng, c: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..c).map(|_| rng.random::<f64>() + 1e-3).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|v| v / z).collect()
}

fn random_tensor(rng: &mut impl Rng, t: usize, n: usize, c: usize) -> PosteriorTensor {
    let mut probs = Vec::with_capacity(t * n * c);
    for _ in 0..t * n {
        probs.extend(random_simplex(rng, c));
    }
    PosteriorTensor::new(t, n, c, probs).unwrap()
}

/// Pairwise orders agree, with scores within `TIE` of each other counted as
/// tied. A single posterior draw makes every score exactly zero in exact
/// arithmetic, and rounding noise then orders them arbitrarily.
fn same_order(a: &[f64], b: &[f64]) -> bool {
    const TIE: f64 = 1e-9;
    let sign = |x: f64| {
        if x.abs() <= TIE {
            0
        } else if x > 0.0 {
            1
        } else {
            -1
        }
    };
    (0..a.len()).all(|p| (0..p).all(|q| sign(a[p] - a[q]) == sign(b[p] - b[q])))
}

fn c1_mell_identity() -> Verdict {
    let start = Instant::now();
    let mut rng = rng_from(derive_seed(1, &[]));
    let tensors = 500;
    let (mut max_err, mut rankings_equal, mut strictly_equal) = (0.0f64, 0, 0);
    for _ in 0..tensors {
        let t = rng.random_range(1..=8);
        let c = rng.random_range(2..=5);
        let n = rng.random_range(2..=20);
        let tensor = random_tensor(&mut rng, t, n, c);
        let split = rng.random_range(1..n);
        let pool: Vec<usize> = (0..split).collect();
        let val: Vec<usize> = (split..n).collect();
        let mell = score_mell(&tensor, &pool, &val).unwrap();
        let h_val: f64 = val.iter().map(|&j| entropy(&tensor.marginal(j).unwrap())).sum();
        for (&i, &s) in pool.iter().zip(mell.scores()) {
            let mi: f64 = val.iter().map(|&j| mutual_information(&tensor.pairwise_joint(i, j).unwrap())).sum();
            max_err = max_err.max((s - (mi - h_val)).abs());
        }
        let full = score_eer_full(&tensor, &pool, &val, LossKind::Log).unwrap();
        rankings_equal += usize::from(same_order(full.scores(), mell.scores()));
        strictly_equal += usize::from(full.ranking() == mell.ranking());
    }
    let elapsed = start.elapsed();
    verdict(
        max_err <= 1e-9 && rankings_equal == tensors && within(elapsed, 10.0),
        format!("{tensors} tensors, max abs error {max_err:.2e}, rankings equal {rankings_equal}/{tensors} ({strictly_equal} without tie tolerance), {elapsed:.2?}"),
    )
}

fn c2_decomposition() -> Verdict {
    let start = Instant::now();
    let s = decomposition_sweep(200, 2).unwrap();
    let elapsed = start.elapsed();
    verdict(
        s.max_violation <= 1e-9 && s.min_labels >= -1e-9 && s.min_residual >= -1e-9 && within(elapsed, 30.0),
        format!(
            "{} models, {} pairs, max violation {:.2e}, min addends {:.2e} / {:.2e}, {elapsed:.2?}",
            s.models, s.pairs, s.max_violation, s.min_labels, s.min_residual
        ),
    )
}

fn c3_prop1() -> Verdict {
    let start = Instant::now();
    let r = default_prop1(3).unwrap();
    let elapsed = start.elapsed();
    verdict(
        r.violations == 0 && r.growth >= 8.0 && within(elapsed, 5.0),
        format!(
            "{} norms, {} bound violations, C = {:.4}, I(Y;θ) growth {:.4} nats, {elapsed:.2?}",
            r.rows.len(),
            r.violations,
            r.rows[0].bound_c,
            r.growth
        ),
    )
}

fn c4_monte_carlo() -> Verdict {
    let start = Instant::now();
    // The first model whose exact scores are separated well beyond the Monte
    // Carlo noise at T=1e4; a near-tied pair makes any estimator's ranking a
    // coin flip.
    let (pool, val) = ([0, 1, 2], [3, 4, 5]);
    let min_gap = |v: Vec<f64>| {
        let mut v = v;
        v.sort_by(f64::total_cmp);
        v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    };
    let (model_seed, model, gap) = (0..)
        .map(|seed| {
            let m = DirichletCategoricalModel::random(6, 3, 5, 1.0, seed).unwrap();
            let gap = min_gap(m.exact_mell(&pool, &val).unwrap())
                .min(min_gap(m.exact_mezl(&pool, &val).unwrap()))
                .min(min_gap(m.exact_bald(&pool).unwrap()));
            (seed, m, gap)
        })
        .find(|(_, _, gap)| *gap >= 0.05)
        .unwrap();
    let cells: Vec<usize> = (0..6).collect();
    let big = model.sample_tensor(&cells, 100_000, 0).unwrap();
    let mut max_err = 0.0f64;
    for i in 0..6 {
        let exact = model.exact_predictive(i).unwrap();
        let mc = big.marginal(i).unwrap();
        exact.probs().iter().zip(mc.probs()).for_each(|(a, b)| max_err = max_err.max((a - b).abs()));
        for j in 0..6 {
            let exact = model.exact_pairwise_joint(i, j).unwrap();
            let mc = big.pairwise_joint(i, j).unwrap();
            exact.probs().iter().zip(mc.probs()).for_each(|(a, b)| max_err = max_err.max((a - b).abs()));
        }
    }

    let rank = |s: Vec<f64>| ScoreVector::from_scores(s).unwrap().ranking();
    let exact = [
        rank(model.exact_mell(&pool, &val).unwrap()),
        rank(model.exact_mezl(&pool, &val).unwrap()),
        rank(model.exact_bald(&pool).unwrap()),
    ];
    let trials = 100;
    let mut matches = [0usize; 3];
    for trial in 0..trials {
        let t = model.sample_tensor(&cells, 10_000, derive_seed(4, &[trial])).unwrap();
        let mc = [
            score_mell(&t, &pool, &val).unwrap().ranking(),
            score_mezl(&t, &pool, &val).unwrap().ranking(),
            score_bald(&t, &pool).unwrap().ranking(),
        ];
        for k in 0..3 {
            matches[k] += usize::from(mc[k] == exact[k]);
        }
    }
    let elapsed = start.elapsed();
    let min_rate = *matches.iter().min().unwrap() as f64 / trials as f64;
    verdict(
        max_err < 0.01 && min_rate >= 0.95 && within(elapsed, 120.0),
        format!(
            "model seed {model_seed} (min exact gap {gap:.3}); max abs error at T=1e5 {max_err:.2e}; ranking matches MELL/MEZL/BALD {}/{}/{} of {trials}, {elapsed:.2?}",
            matches[0], matches[1], matches[2]
        ),
    )
}

fn c5_optimal_prediction() -> Verdict {
    let start = Instant::now();
    let mut rng = rng_from(derive_seed(5, &[]));
    let joints = 1000;
    let mut failures = 0;
    for k in 0..joints {
        let c = rng.random_range(2..=5);
        let p = random_simplex(&mut rng, c * c);
        let joint = JointDistribution::new(c, p).unwrap();
        if !verify_optimal_prediction(&joint, 100, derive_seed(5, &[k])) {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        failures == 0 && within(elapsed, 30.0),
        format!("{joints} joints × 100 alternatives, {failures} losses beyond 1e-9, {elapsed:.2?}"),
    )
}

fn c6_xor() -> Verdict {
    let start = Instant::now();
    let r = xor_report(10).unwrap();
    let elapsed = start.elapsed();
    let max_spread = r.scores.spreads().iter().map(|(_, s)| *s).fold(0.0, f64::max);
    let partner = r.two_step_mell[r.partner];
    let ok = max_spread < 1e-12
        && (partner - std::f64::consts::LN_2).abs() <= 1e-9
        && r.objective_pair.abs() <= 1e-12
        && r.witness.violates()
        && (r.witness.gain_b - std::f64::consts::LN_2).abs() <= 1e-12
        && r.witness.gain_a.abs() <= 1e-12;
    verdict(
        ok && within(elapsed, 5.0),
        format!(
            "m=10: max score spread {max_spread:.1e}, two-step partner {partner:.12}, f(pair) {:.1e}, gains {:.3}/{:.3}, {elapsed:.2?}",
            r.objective_pair, r.witness.gain_a, r.witness.gain_b
        ),
    )
}

fn c7_mezl_failure() -> Verdict {
    let start = Instant::now();
    let r = mezl_failure().unwrap();
    let elapsed = start.elapsed();
    let ok = r.candidate_reduction == 0.0
        && r.candidate_mi > 0.05
        && r.candidate_mi > r.null_mi
        && (r.candidate_mezl - r.null_mezl).abs() <= 1e-12
        && r.candidate_reduction == r.null_reduction;
    verdict(
        ok && within(elapsed, 1.0),
        format!(
            "reduction {}, I(Y_cand;Y_v) {:.4} vs null {:.4}, MEZL {:.6} vs {:.6}, {elapsed:.2?}",
            r.candidate_reduction, r.candidate_mi, r.null_mi, r.candidate_mezl, r.null_mezl
        ),
    )
}

fn c8_simpson() -> Verdict {
    let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let quad = auc_simpson(&xs, &sq).unwrap().value;
    let mut max_lin = 0.0f64;
    for (xs, a, b) in [
        (vec![0.0, 1.0, 2.0, 3.0], 0.5, 1.0),
        (vec![100.0, 125.0, 150.0, 175.0, 200.0, 230.0], -0.002, 0.9),
        (vec![1.0, 1.5, 4.0, 4.2, 9.0], 3.0, -2.0),
    ] {
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let trap: f64 = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0).sum::<f64>()
            / (xs[xs.len() - 1] - xs[0]);
        max_lin = max_lin.max((auc_simpson(&xs, &ys).unwrap().value - trap).abs());
    }
    verdict(
        (quad - 16.0 / 3.0).abs() <= 1e-12 && max_lin <= 1e-9,
        format!("x² AUC {quad:.15} (16/3), max linear gap to trapezoid {max_lin:.1e}"),
    )
}

fn c9_table_one() -> Verdict {
    let start = Instant::now();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/shifted_mixture.toml");
    let cfg = ExperimentConfig::load(&path, &[]).unwrap();
    let strategies = [Strategy::Mell, Strategy::Random, Strategy::Bald, Strategy::EntropyMc];
    let seeds: Vec<u64> = (0..10).collect();
    let parallel = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = run_sweep(&cfg, &strategies, &seeds, parallel).unwrap();
    let elapsed = start.elapsed();
    if !report.failures.is_empty() {
        return verdict(false, format!("{} cells failed: {:?}", report.failures.len(), report.failures));
    }
    let group =
        |s: Strategy| -> Vec<ExperimentResult> { report.results.iter().filter(|r| r.strategy == s).cloned().collect() };
    let mell = group(Strategy::Mell);
    let vs_random = compare_methods(&mell, &group(Strategy::Random)).unwrap();
    let vs_bald = compare_methods(&mell, &group(Strategy::Bald)).unwrap();
    let vs_entropy = compare_methods(&mell, &group(Strategy::EntropyMc)).unwrap();
    let rows = aggregate(&report.results);
    let mean = |s: Strategy| rows.iter().find(|r| r.strategy == s).unwrap().mean_auc;
    let frozen = (mean(Strategy::Mell) - FROZEN_MELL_AUC).abs() <= FROZEN_TOLERANCE
        && (mean(Strategy::Random) - FROZEN_RANDOM_AUC).abs() <= FROZEN_TOLERANCE;
    let table: Vec<String> =
        rows.iter().map(|r| format!("{} {:.4}±{:.4}", r.strategy, r.mean_auc, r.std_auc)).collect();
    verdict(
        vs_random == Outcome::Win
            && vs_bald != Outcome::Loss
            && vs_entropy != Outcome::Loss
            && frozen
            && within(elapsed, 600.0),
        format!(
            "MELL vs random {}, vs bald {}, vs entropy_mc {}; {}; frozen AUCs {}, {elapsed:.1?}",
            vs_random.as_str(),
            vs_bald.as_str(),
            vs_entropy.as_str(),
            table.join(", "),
            if frozen { "match" } else { "DIFFER" }
        ),
    )
}

fn c10_gradient() -> Verdict {
    let start = Instant::now();
    let mut rng = rng_from(derive_seed(10, &[]));
    let configs = 20;
    let mut worst = 0.0f64;
    for k in 0..configs {
        let dim = rng.random_range(1..=4);
        let classes = rng.random_range(2..=4);
        let hidden: Vec<usize> = (0..rng.random_range(0..=2)).map(|_| rng.random_range(2..=6)).collect();
        let rows = rng.random_range(1..=5);
        let config = MlpConfig { hidden, dropout: 0.3, weight_decay: 1e-3, ..MlpConfig::default() };
        let mut mlp = DropoutMlp::new(dim, classes, config, derive_seed(10, &[k])).unwrap();
        let x = Array2::from_shape_fn((rows, dim), |_| rng.random_range(-2.0..2.0));
        let labels: Vec<usize> = (0..rows).map(|_| rng.random_range(0..classes)).collect();
        let masks = mlp.sample_masks(derive_seed(10, &[k, 1]));
        let masks = (k % 2 == 1).then_some(masks.as_slice());
        // Zero initial biases put ReLU kinks exactly at 0 whenever a whole
        // layer is inactive; a random parameter point avoids them.
        let params: Vec<f64> = mlp.parameters().iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        mlp.set_parameters(&params).unwrap();
        let (_, grad) = mlp.loss_and_gradient(x.view(), &labels, masks).unwrap();
        let h = 1e-6;
        let mut fd = Vec::with_capacity(params.len());
        for p in 0..params.len() {
            let mut shifted = params.clone();
            shifted[p] += h;
            mlp.set_parameters(&shifted).unwrap();
            let (up, _) = mlp.loss_and_gradient(x.view(), &labels, masks).unwrap();
            shifted[p] -= 2.0 * h;
            mlp.set_parameters(&shifted).unwrap();
            let (down, _) = mlp.loss_and_gradient(x.view(), &labels, masks).unwrap();
            fd.push((up - down) / (2.0 * h));
        }
        mlp.set_parameters(&params).unwrap();
        let diff: f64 = grad.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = grad.iter().map(|a| a * a).sum::<f64>().sqrt() + fd.iter().map(|b| b * b).sum::<f64>().sqrt();
        worst = worst.max(diff / norm.max(1e-12));
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-4 && within(elapsed, 10.0),
        format!("{configs} configurations, max relative error {worst:.2e}, {elapsed:.2?}"),
    )
}

fn c11_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/blobs.toml");
    for out in ["first", "second"] {
        let status = Command::new(env!("CARGO_BIN_EXE_eerlab"))
            .args(["sweep", "--config", cfg.to_str().unwrap(), "--strategies", "mell,bald,random,coreset,badge"])
            .args(["--seeds", "0,1,2", "--parallel", "2", "--override", "output.record_timing=false", "--out", out])
            .current_dir(dir.path())
            .output()
            .unwrap();
        if !status.status.success() {
            return verdict(false, format!("sweep failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
    }
    let mut names: Vec<String> = fs::read_dir(dir.path().join("first"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    let differing: Vec<&String> = names
        .iter()
        .filter(|n| fs::read(dir.path().join("first").join(n)).ok() != fs::read(dir.path().join("second").join(n)).ok())
        .collect();
    verdict(
        differing.is_empty() && names.len() == 17,
        format!("{} CSV files compared, {} differ", names.len(), differing.len()),
    )
}

fn c12_complexity() -> Verdict {
    let mut rng = rng_from(derive_seed(12, &[]));
    let time = |rng: &mut rand_chacha::ChaCha8Rng, j: usize, l: usize, t: usize| -> f64 {
        let tensor = random_tensor(rng, t, j + l, 3);
        let pool: Vec<usize> = (0..j).collect();
        let val: Vec<usize> = (j..j + l).collect();
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let start = Instant::now();
            std::hint::black_box(score_mell(&tensor, &pool, &val).unwrap());
            best = best.min(start.elapsed().as_secs_f64());
        }
        best
    };
    let (j, l, t) = (200, 300, 50);
    let base = time(&mut rng, j, l, t);
    let ratios =
        [time(&mut rng, 2 * j, l, t) / base, time(&mut rng, j, 2 * l, t) / base, time(&mut rng, j, l, 2 * t) / base];
    let ok = ratios.iter().all(|r| (1.4..=3.0).contains(r));
    verdict(
        ok,
        format!(
            "base {:.1} ms; doubling J/L/T scales time by {:.2}/{:.2}/{:.2}",
            base * 1e3,
            ratios[0],
            ratios[1],
            ratios[2]
        ),
    )
}

fn main() -> ExitCode {
    let gate_timing = std::env::var("EERLAB_GATE_TIMING").is_ok_and(|v| v == "1");
    let criteria: [Criterion; 12] = [
        ("MELL identity", c1_mell_identity, true),
        ("decomposition identity", c2_decomposition, true),
        ("label-label information bound", c3_prop1, true),
        ("Monte Carlo consistency", c4_monte_carlo, true),
        ("optimal prediction under log loss", c5_optimal_prediction, true),
        ("XOR myopia", c6_xor, true),
        ("MEZL failure mode", c7_mezl_failure, true),
        ("Simpson AUC", c8_simpson, true),
        ("MELL vs baselines on shifted mixture", c9_table_one, true),
        ("MLP gradient check", c10_gradient, true),
        ("sweep determinism", c11_determinism, true),
        ("scoring complexity", c12_complexity, gate_timing),
    ];
    let mut failed = 0;
    for (k, (name, check, gating)) in criteria.into_iter().enumerate() {
        let v = check();
        let status = match (v.passed, gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (non-gating)",
        };
        println!("criterion {:>2} {status}: {name}: {}", k + 1, v.detail);
        if !v.passed && gating {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all gating criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} gating criteria failed");
        ExitCode::FAILURE
    }
}
