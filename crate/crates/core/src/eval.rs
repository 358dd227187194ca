//! Prediction and F1 / ROC AUC on labeled data. Anomaly is the positive class.

use std::time::{Duration, Instant};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::NeighborIndex;
use crate::lof::{novelty_scores_from_table, scores_from_table};
use crate::model::TunedModel;
use crate::tuner::{block_size, top_ranked, tune, TuningGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Anomaly flags for each validation row.
pub fn predict(model: &TunedModel, validation: &Dataset) -> Result<Vec<bool>> {
    model.predict(validation)
}

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
struct Confusion {
    tp: usize,
    fp: usize,
    tn: usize,
    fn_: usize,
}

fn confusion(truth: &[bool], predicted: &[bool]) -> Confusion {
    let mut c = Confusion::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    c
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// F1 of the anomaly class; 0 when precision and recall are both 0.
pub fn f1_score(truth: &[bool], predicted: &[bool]) -> Result<f64> {
    check_lengths(truth.len(), predicted.len())?;
    if truth.is_empty() {
        return Err(Error::TooFewValues { needed: 1, found: 0 });
    }
    let c = confusion(truth, predicted);
    Ok(f1_from(ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn_)))
}

/// Area under the ROC curve via midranks (Mann-Whitney), ties worth 1/2.
pub fn roc_auc(truth: &[bool], scores: &[f64]) -> Result<f64> {
    check_lengths(truth.len(), scores.len())?;
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::NonFiniteValue { row: i, col: 0 });
    }
    let positives = truth.iter().filter(|t| **t).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::OneClassOnly);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum keeps midranks integral
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end, midrank (start + 1 + end) / 2
        let twice_mid = (start + 1 + end) as u128;
        let pos_in_group = order[start..end].iter().filter(|&&i| truth[i]).count() as u128;
        twice_rank_sum += twice_mid * pos_in_group;
        start = end;
    }
    let p = positives as u128;
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2.0 * positives as f64 * negatives as f64))
}

/// Full report for raw scores thresholded at `threshold` (anomaly iff score >= threshold).
pub fn evaluate_scores(truth: &[bool], scores: &[f64], threshold: f64) -> Result<EvalReport> {
    check_lengths(truth.len(), scores.len())?;
    let predicted: Vec<bool> = scores.iter().map(|s| *s >= threshold).collect();
    let c = confusion(truth, &predicted);
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    Ok(EvalReport {
        tp: c.tp,
        fp: c.fp,
        tn: c.tn,
        fn_: c.fn_,
        precision,
        recall,
        f1: f1_from(precision, recall),
        auc: roc_auc(truth, scores)?,
    })
}

/// Scores `validation` with `model` and reports against `truth`.
pub fn evaluate(model: &TunedModel, validation: &Dataset, truth: &[bool]) -> Result<EvalReport> {
    let scores = model.score(validation)?;
    evaluate_scores(truth, &scores, model.threshold())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCellEval {
    pub c: f64,
    pub k: usize,
    pub f1: f64,
    pub auc: f64,
}

/// Validation F1 and AUC of every `(c, k)` on a grid, each cell using the
/// threshold the tuner would store for it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEvaluation {
    pub cells: Vec<GridCellEval>,
}

impl GridEvaluation {
    pub fn best_f1(&self) -> f64 {
        self.cells.iter().map(|c| c.f1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn best_auc(&self) -> f64 {
        self.cells.iter().map(|c| c.auc).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn cell(&self, c: f64, k: usize) -> Option<&GridCellEval> {
        self.cells.iter().find(|e| e.c == c && e.k == k)
    }
}

/// Evaluates every grid cell on already-projected training and validation points.
pub fn evaluate_grid(
    training: &Dataset,
    grid: &TuningGrid,
    validation: &Dataset,
    truth: &[bool],
) -> Result<GridEvaluation> {
    check_lengths(validation.n(), truth.len())?;
    let n = training.n();
    grid.check_feasible(n)?;
    let k_max = grid.k_max();
    if k_max + 1 > n {
        return Err(Error::KOutOfRange { k: k_max, n });
    }
    let index = NeighborIndex::build(training);
    let train_table = index.neighbor_lists_up_to_k(k_max)?;
    let valid_table = index.query_many(validation, k_max)?;
    let mut cells = Vec::new();
    for &k in grid.neighborhood_sizes() {
        let fitted = scores_from_table(&train_table, k);
        let scores = novelty_scores_from_table(&valid_table, &fitted);
        let auc = roc_auc(truth, &scores)?;
        for &c in grid.contaminations() {
            let m = block_size(c, n);
            let threshold = fitted.scores[top_ranked(&fitted.scores, m)[m - 1]];
            let predicted: Vec<bool> = scores.iter().map(|s| *s >= threshold).collect();
            cells.push(GridCellEval {
                c,
                k,
                f1: f1_score(truth, &predicted)?,
                auc,
            });
        }
    }
    Ok(GridEvaluation { cells })
}

/// Tuned model quality next to the best any single grid cell achieves.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedVsBest {
    pub c_opt: f64,
    pub k_opt: usize,
    pub tuned: EvalReport,
    pub best_f1: f64,
    pub best_auc: f64,
    pub tune_time: Duration,
}

impl TunedVsBest {
    pub fn f1_gap(&self) -> f64 {
        self.best_f1 - self.tuned.f1
    }

    pub fn auc_gap(&self) -> f64 {
        self.best_auc - self.tuned.auc
    }
}

/// Tunes on `training`, evaluates on `validation`, and evaluates every grid
/// cell for comparison. Inputs are used as given (project beforehand).
pub fn tuned_vs_best(
    training: &Dataset,
    grid: &TuningGrid,
    validation: &Dataset,
    truth: &[bool],
) -> Result<TunedVsBest> {
    let start = Instant::now();
    let model = tune(training, grid)?;
    let tune_time = start.elapsed();
    let tuned = evaluate(&model, validation, truth)?;
    let all = evaluate_grid(training, grid, validation, truth)?;
    Ok(TunedVsBest {
        c_opt: model.c_opt(),
        k_opt: model.k_opt(),
        tuned,
        best_f1: all.best_f1(),
        best_auc: all.best_auc(),
        tune_time,
    })
}
