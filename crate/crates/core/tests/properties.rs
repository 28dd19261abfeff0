use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scddq::agent::argmax;
use scddq::analysis::{action_distribution, entropy, pearson};
use scddq::curriculum::{build_buffers, classify_goal, DifficultyLevel, Schedule, ScheduleName};
use scddq::goal::generate_goal_set;
use scddq::kb::generate_kb;
use scddq::nn::{Activation, LossKind, Matrix, MlpModel, ModelSpec, TrainBatch};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_bounded(counts in proptest::collection::vec(0i64..1000, 29)) {
        let d = action_distribution(1, &counts).unwrap();
        prop_assume!(!d.is_empty());
        let h = entropy(&d).unwrap();
        prop_assert!(h >= 0.0 && h <= 29f64.log2() + 1e-12);
        prop_assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pearson_symmetry_and_scaling(
        x in proptest::collection::vec(-10.0f64..10.0, 3..30),
        noise in proptest::collection::vec(-10.0f64..10.0, 30),
        a in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        b in -5.0f64..5.0,
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(u, v)| u + v).collect();
        let (Ok(r), Ok(r2)) = (pearson(&x, &y), pearson(&y, &x)) else { return Ok(()); };
        prop_assert!((r - r2).abs() < 1e-12);
        prop_assert!(r.abs() <= 1.0);
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!((pearson(&ax, &y).unwrap() - a.signum() * r).abs() < 1e-9);
    }

    #[test]
    fn schedules_are_piecewise_constant(epoch in 0usize..300) {
        for name in ScheduleName::NAMED {
            let s = Schedule::named(name).unwrap();
            let level = s.stage_for_epoch(epoch).unwrap();
            let stage = s.stage_index(epoch).unwrap();
            let start = [0, 70, 140, 210][stage - 1];
            prop_assert_eq!(s.stage_for_epoch(start).unwrap(), level);
            if stage == 4 {
                prop_assert_eq!(level, DifficultyLevel::All);
            }
        }
    }

    #[test]
    fn argmax_picks_a_maximum_with_lowest_index(v in proptest::collection::vec(-3i32..3, 1..40)) {
        let f: Vec<f64> = v.iter().map(|x| *x as f64).collect();
        let i = argmax(&f);
        let max = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(f[i], max);
        prop_assert!(f[..i].iter().all(|x| *x < max));
    }

    #[test]
    fn parameters_stay_finite(seed in 0u64..1000, scale in 0.1f64..10.0) {
        let spec = ModelSpec::build(4, &[6], &[
            ("a", &[], 3, Activation::Softmax, LossKind::CrossEntropy),
            ("b", &[], 1, Activation::Sigmoid, LossKind::BinaryCrossEntropy),
            ("c", &[], 2, Activation::Linear, LossKind::Mse),
        ]);
        let mut net = MlpModel::new(spec, seed).unwrap();
        let x = Matrix::from_rows(&[[scale, -scale, 0.5, 1.0], [0.0, scale, -1.0, 0.2]]).unwrap();
        let batch = TrainBatch::new(x, 3)
            .with_target(0, Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap())
            .with_target(1, Matrix::from_rows(&[[1.0], [0.0]]).unwrap())
            .with_target(2, Matrix::from_rows(&[[scale, 0.0], [-scale, 1.0]]).unwrap());
        for _ in 0..20 {
            net.train_minibatch(&batch, 0.01).unwrap();
        }
        prop_assert!(net.params().iter().all(|p| p.is_finite()));
    }
}

#[test]
fn partition_is_exhaustive_and_disjoint() {
    let kb = generate_kb(11, 300).unwrap();
    let counts = [(1, 20), (2, 10), (3, 10), (4, 10), (5, 5)].into_iter().collect();
    let goals = generate_goal_set(&kb, &counts, 11).unwrap();
    let b = build_buffers(&goals).unwrap();
    assert_eq!(b.total, goals);
    assert_eq!(b.easy.len() + b.middle.len() + b.difficult.len(), goals.len());
    for g in &goals {
        let level = classify_goal(g).unwrap();
        let homes = [&b.easy, &b.middle, &b.difficult]
            .iter()
            .filter(|buf| buf.contains(g))
            .count();
        assert_eq!(homes, 1);
        assert!(b.level(level).contains(g));
    }
}

#[test]
fn easy_sampling_is_uniform() {
    let kb = generate_kb(7, 991).unwrap();
    let goals = generate_goal_set(&kb, &scddq::goal::default_goal_counts(), 7).unwrap();
    let b = build_buffers(&goals).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 100_000;
    let mut freq = std::collections::HashMap::new();
    for _ in 0..n {
        let g = scddq::curriculum::sample_goal(&b, DifficultyLevel::Easy, &mut rng).unwrap();
        *freq.entry(g).or_insert(0usize) += 1;
    }
    assert_eq!(freq.len(), 61);
    for c in freq.values() {
        assert!((*c as f64 / n as f64 - 1.0 / 61.0).abs() <= 0.003);
    }
}
