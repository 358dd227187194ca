mod common;

use common::{random_rows, rel_diff, rng};
use loftune::lof::lof_train_scores;
use loftune::model::{read_model, write_model};
use loftune::projection::make_projection;
use loftune::tuner::{split_out_in, t_statistic};
use loftune::{tune, tune_with_projection, validate_dataset, TuningGrid};
use proptest::prelude::*;
use rand::Rng;

fn rotate(rows: &[Vec<f64>], angle: f64, shift: [f64; 2]) -> Vec<Vec<f64>> {
    let (s, c) = angle.sin_cos();
    rows.iter()
        .map(|r| vec![c * r[0] - s * r[1] + shift[0], s * r[0] + c * r[1] + shift[1]])
        .collect()
}

fn small_grid() -> TuningGrid {
    TuningGrid::new(vec![0.02, 0.04], (3..=12).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lof_invariant_under_rigid_motion_and_scale(
        seed in any::<u64>(),
        angle in 0.0..std::f64::consts::TAU,
        dx in -50.0..50.0f64,
        dy in -50.0..50.0f64,
        scale in 0.01..100.0f64,
        k in 1usize..15,
    ) {
        let rows = random_rows(&mut rng(seed), 60, 2, 1.0);
        let base = lof_train_scores(&validate_dataset(&rows).unwrap(), k).unwrap();
        let moved = rotate(&rows, angle, [dx, dy]);
        let moved = lof_train_scores(&validate_dataset(&moved).unwrap(), k).unwrap();
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
        let scaled = lof_train_scores(&validate_dataset(&scaled).unwrap(), k).unwrap();
        for i in 0..rows.len() {
            prop_assert!(rel_diff(base.scores[i], moved.scores[i]) < 1e-9);
            prop_assert!(rel_diff(base.scores[i], scaled.scores[i]) < 1e-9);
        }
    }

    #[test]
    fn t_unchanged_when_scores_are_scaled(seed in any::<u64>(), factor in 0.05..20.0f64) {
        let mut r = rng(seed);
        let scores: Vec<f64> = (0..200).map(|_| r.random_range(0.5..3.0)).collect();
        let scaled: Vec<f64> = scores.iter().map(|s| s * factor).collect();
        let (a_out, a_in) = split_out_in(&scores, 20).unwrap();
        let (b_out, b_in) = split_out_in(&scaled, 20).unwrap();
        let ta = t_statistic(&a_out, &a_in).unwrap();
        let tb = t_statistic(&b_out, &b_in).unwrap();
        prop_assert!(rel_diff(ta, tb) < 1e-9);
    }

    #[test]
    fn lof_follows_row_permutation(seed in any::<u64>(), k in 1usize..10) {
        let mut r = rng(seed);
        let rows = random_rows(&mut r, 50, 3, 1.0);
        let mut perm: Vec<usize> = (0..rows.len()).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, r.random_range(0..=i));
        }
        let shuffled: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let base = lof_train_scores(&validate_dataset(&rows).unwrap(), k).unwrap();
        let other = lof_train_scores(&validate_dataset(&shuffled).unwrap(), k).unwrap();
        for (j, &i) in perm.iter().enumerate() {
            prop_assert!(rel_diff(base.scores[i], other.scores[j]) < 1e-9);
        }
    }

    #[test]
    fn model_round_trips(seed in any::<u64>(), projected in any::<bool>()) {
        let mut r = rng(seed);
        let grid = small_grid();
        let model = if projected {
            let data = validate_dataset(&random_rows(&mut r, 120, 5, 1.0)).unwrap();
            tune_with_projection(&data, &grid, make_projection(5, 2, seed).unwrap()).unwrap()
        } else {
            let data = validate_dataset(&random_rows(&mut r, 120, 2, 1.0)).unwrap();
            tune(&data, &grid).unwrap()
        };
        let mut buf = Vec::new();
        write_model(&model, &mut buf).unwrap();
        let back = read_model(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &model);
        let queries = validate_dataset(&random_rows(&mut r, 10, model.input_dim(), 1.5)).unwrap();
        prop_assert_eq!(back.score(&queries).unwrap(), model.score(&queries).unwrap());
    }

    #[test]
    fn tuning_is_deterministic(seed in any::<u64>()) {
        let data = validate_dataset(&random_rows(&mut rng(seed), 120, 2, 1.0)).unwrap();
        let a = tune(&data, &small_grid()).unwrap();
        let b = tune(&data, &small_grid()).unwrap();
        prop_assert_eq!(a.score_table(), b.score_table());
        prop_assert_eq!(a.threshold().to_bits(), b.threshold().to_bits());
    }
}
