//! Local outlier factor scores for training rows and for unseen queries.
//!
//! A row's neighborhood is exactly its `k` nearest other rows under the
//! `(distance, id)` order, so scores for every `k` up to some maximum can be
//! read off one shared neighbor table.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::{NeighborIndex, NeighborTable};

/// Lower bound on the mean reachability distance before it is inverted.
///
/// A row whose `k` neighbors all coincide with it would otherwise get an
/// infinite density.
pub const MIN_MEAN_REACH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LofScores {
    pub k: usize,
    /// LOF of each training row.
    pub scores: Vec<f64>,
    /// Local reachability density of each training row.
    pub lrd: Vec<f64>,
    /// Distance from each training row to its `k`-th neighbor.
    pub kdist: Vec<f64>,
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k + 1 > n {
        Err(Error::KOutOfRange { k, n })
    } else {
        Ok(())
    }
}

/// LOF of every training row at neighborhood size `k`, self excluded.
pub fn lof_train_scores(data: &Dataset, k: usize) -> Result<LofScores> {
    check_k(k, data.n())?;
    let index = NeighborIndex::build(data);
    let table = index.neighbor_lists_up_to_k(k)?;
    Ok(scores_from_table(&table, k))
}

/// LOF scores for each `k` in `k_values`, sharing one neighbor pass.
pub fn lof_scores_over_grid(data: &Dataset, k_values: &[usize]) -> Result<Vec<LofScores>> {
    let Some(&k_max) = k_values.iter().max() else {
        return Ok(Vec::new());
    };
    for &k in k_values {
        check_k(k, data.n())?;
    }
    let index = NeighborIndex::build(data);
    let table = index.neighbor_lists_up_to_k(k_max)?;
    Ok(k_values
        .iter()
        .map(|&k| scores_from_table(&table, k))
        .collect())
}

/// LOF scores at `k` from a self-excluded neighbor table at least `k` wide.
pub fn scores_from_table(table: &NeighborTable, k: usize) -> LofScores {
    assert!(k >= 1 && k <= table.k_max(), "k outside neighbor table");
    let n = table.rows();
    let kdist: Vec<f64> = (0..n).map(|i| table.distances(i, k)[k - 1]).collect();
    let lrd: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| density(table.ids(i, k), table.distances(i, k), &kdist))
        .collect();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| mean_of(table.ids(i, k).iter().map(|&j| lrd[j])) / lrd[i])
        .collect();
    LofScores {
        k,
        scores,
        lrd,
        kdist,
    }
}

#[inline]
fn mean_of(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let len = values.len() as f64;
    values.sum::<f64>() / len
}

/// Local reachability density from a neighborhood and the neighbors' k-distances.
#[inline]
fn density(ids: &[usize], dists: &[f64], kdist: &[f64]) -> f64 {
    let mean_reach = mean_of(ids.iter().zip(dists).map(|(&j, &d)| kdist[j].max(d)));
    1.0 / mean_reach.max(MIN_MEAN_REACH)
}

/// A fitted training set: everything needed to score unseen points.
#[derive(Debug, Clone)]
pub struct LofNovelty {
    index: NeighborIndex,
    fitted: LofScores,
}

impl LofNovelty {
    pub fn new(training: &Dataset, fitted: LofScores) -> Result<Self> {
        if fitted.scores.len() != training.n() {
            return Err(Error::LengthMismatch {
                left: fitted.scores.len(),
                right: training.n(),
            });
        }
        check_k(fitted.k, training.n())?;
        Ok(Self {
            index: NeighborIndex::build(training),
            fitted,
        })
    }

    /// Fits LOF on `training` at `k` and keeps the structures for scoring.
    pub fn fit(training: &Dataset, k: usize) -> Result<Self> {
        check_k(k, training.n())?;
        let index = NeighborIndex::build(training);
        let table = index.neighbor_lists_up_to_k(k)?;
        let fitted = scores_from_table(&table, k);
        Ok(Self { index, fitted })
    }

    pub fn k(&self) -> usize {
        self.fitted.k
    }

    pub fn fitted(&self) -> &LofScores {
        &self.fitted
    }

    pub fn index(&self) -> &NeighborIndex {
        &self.index
    }

    /// LOF of one query against the training rows.
    pub fn score(&self, query: &[f64]) -> Result<f64> {
        let list = self.index.query_k_nearest(query, self.fitted.k, None)?;
        let ids: Vec<usize> = list.neighbors.iter().map(|n| n.id).collect();
        let dists: Vec<f64> = list.neighbors.iter().map(|n| n.distance).collect();
        Ok(novelty_from_neighbors(&ids, &dists, &self.fitted))
    }

    /// LOF of each row of `queries` against the training rows.
    pub fn score_many(&self, queries: &Dataset) -> Result<Vec<f64>> {
        let table = self.index.query_many(queries, self.fitted.k)?;
        Ok(novelty_scores_from_table(&table, &self.fitted))
    }
}

/// Novelty LOF of one query from its training neighbors.
pub fn novelty_from_neighbors(ids: &[usize], dists: &[f64], fitted: &LofScores) -> f64 {
    let lrd_q = density(ids, dists, &fitted.kdist);
    mean_of(ids.iter().map(|&j| fitted.lrd[j])) / lrd_q
}

/// Novelty LOF for every row of a query-to-training neighbor table at
/// least `fitted.k` wide.
pub fn novelty_scores_from_table(table: &NeighborTable, fitted: &LofScores) -> Vec<f64> {
    let k = fitted.k;
    (0..table.rows())
        .into_par_iter()
        .map(|i| novelty_from_neighbors(table.ids(i, k), table.distances(i, k), fitted))
        .collect()
}

/// Scores a single query against a training set and its fitted scores.
pub fn lof_novelty_score(training: &Dataset, fitted: &LofScores, query: &[f64]) -> Result<f64> {
    if query.len() != training.p() {
        return Err(Error::DimensionMismatch {
            expected: training.p(),
            found: query.len(),
        });
    }
    LofNovelty::new(training, fitted.clone())?.score(query)
}
