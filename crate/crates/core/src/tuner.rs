//! Selection of contamination `c` and neighborhood size `k`.
//!
//! For every `(c, k)` on the grid the training LOF scores at `k` are ranked
//! in descending order. With `m = floor(c n)`, ranks `1..=m` form the outlier
//! block and ranks `m+1..=2m` the inlier block. The statistic
//!
//! ```text
//! T = (M_out - M_in) / sqrt((V_out + V_in) / m)
//! ```
//!
//! compares the mean log scores of the two blocks. Each `c` keeps the `k`
//! with the largest `T`, and the winning `c` is the one whose `T` sits at the
//! highest quantile of a noncentral t with `2m - 2` degrees of freedom and
//! noncentrality built from the block moments averaged over the `k` grid.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::NeighborIndex;
use crate::lof::scores_from_table;
use crate::model::TunedModel;
use crate::nct::{mean_var, noncentral_t_cdf, NctParams};
use crate::projection::{project, ProjectionSpec};

/// Stand-in for `T` (or `ncp`) when both block variances are zero.
pub const T_SENTINEL: f64 = f64::MAX;

/// Scores are compared after rounding to this absolute resolution, so that
/// values differing only by summation-order noise tie and fall back to row id.
pub const RANK_RESOLUTION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TuningGrid {
    contaminations: Vec<f64>,
    neighborhood_sizes: Vec<usize>,
}

impl TuningGrid {
    pub fn new(contaminations: Vec<f64>, neighborhood_sizes: Vec<usize>) -> Result<Self> {
        if contaminations.is_empty() || neighborhood_sizes.is_empty() {
            return Err(Error::InvalidGrid("grid axes must be non-empty".into()));
        }
        if let Some(c) = contaminations.iter().find(|c| !(**c > 0.0 && **c < 0.5)) {
            return Err(Error::InvalidGrid(format!(
                "contamination {c} outside (0, 0.5)"
            )));
        }
        if contaminations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "contaminations must be strictly increasing".into(),
            ));
        }
        if neighborhood_sizes[0] == 0 {
            return Err(Error::InvalidGrid("neighborhood sizes must be >= 1".into()));
        }
        if neighborhood_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "neighborhood sizes must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            contaminations,
            neighborhood_sizes,
        })
    }

    pub fn contaminations(&self) -> &[f64] {
        &self.contaminations
    }

    pub fn neighborhood_sizes(&self) -> &[usize] {
        &self.neighborhood_sizes
    }

    pub fn k_max(&self) -> usize {
        *self.neighborhood_sizes.last().expect("non-empty grid")
    }

    /// Checks `2 <= floor(c n)` and `2 floor(c n) <= n` for every `c`.
    pub fn check_feasible(&self, n: usize) -> Result<()> {
        for &c in &self.contaminations {
            let m = block_size(c, n);
            if m < 2 || 2 * m > n {
                return Err(Error::GridInfeasible { c, n, m });
            }
        }
        Ok(())
    }
}

/// `floor(c n)`, nudged so that products like `0.01 * 1600` land on 16.
pub fn block_size(c: f64, n: usize) -> usize {
    (c * n as f64 + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub c: f64,
    pub k: usize,
    pub m: usize,
    pub mean_out: f64,
    pub mean_in: f64,
    pub var_out: f64,
    pub var_in: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationStats {
    pub c: f64,
    pub m: usize,
    pub df: f64,
    pub ncp: f64,
    pub k_opt: usize,
    pub t_opt: f64,
    pub quantile: f64,
}

/// All cells of a tuning run, `c`-major, plus the per-`c` summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LofScoreTable {
    pub n: usize,
    pub cells: Vec<CellStats>,
    pub per_c: Vec<ContaminationStats>,
}

impl LofScoreTable {
    pub fn cells_for(&self, c: f64) -> impl Iterator<Item = &CellStats> {
        self.cells.iter().filter(move |cell| cell.c == c)
    }

    /// Tab-separated dump, one line per cell with its `c` summary repeated.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "c\tk\tm\tM_out\tM_in\tV_out\tV_in\tT\tdf\tncp\tquantile\tk_opt"
        )?;
        for cell in &self.cells {
            let summary = self
                .per_c
                .iter()
                .find(|s| s.c == cell.c)
                .ok_or_else(|| Error::InvariantViolation("cell without c summary".into()))?;
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                cell.c,
                cell.k,
                cell.m,
                cell.mean_out,
                cell.mean_in,
                cell.var_out,
                cell.var_in,
                cell.t,
                summary.df,
                summary.ncp,
                summary.quantile,
                summary.k_opt
            )?;
        }
        Ok(())
    }
}

#[inline]
fn rank_key(score: f64) -> f64 {
    (score / RANK_RESOLUTION).round()
}

/// Descending `(score, ascending id)` order.
fn rank_cmp(scores: &[f64], a: usize, b: usize) -> Ordering {
    rank_key(scores[b])
        .total_cmp(&rank_key(scores[a]))
        .then(a.cmp(&b))
}

/// Row ids of the `count` highest-ranked scores, best first.
pub fn top_ranked(scores: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    let count = count.min(order.len());
    if count == 0 {
        return Vec::new();
    }
    if count < order.len() {
        order.select_nth_unstable_by(count - 1, |&a, &b| rank_cmp(scores, a, b));
        order.truncate(count);
    }
    order.sort_unstable_by(|&a, &b| rank_cmp(scores, a, b));
    order
}

fn check_block(m: usize, n: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::ContaminationTooSmall { m });
    }
    if 2 * m > n {
        return Err(Error::ContaminationTooLarge { m, n });
    }
    Ok(())
}

/// Log scores of the outlier block (ranks `1..=m`) and inlier block
/// (ranks `m+1..=2m`).
pub fn split_out_in(scores: &[f64], m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_block(m, scores.len())?;
    if let Some(index) = scores.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::NonPositiveValue { index });
    }
    let order = top_ranked(scores, 2 * m);
    Ok(block_logs(scores, &order, m))
}

fn block_logs(scores: &[f64], order: &[usize], m: usize) -> (Vec<f64>, Vec<f64>) {
    let out = order[..m].iter().map(|&i| scores[i].ln()).collect();
    let inl = order[m..2 * m].iter().map(|&i| scores[i].ln()).collect();
    (out, inl)
}

/// Standardized mean difference of two blocks of size `m`.
///
/// With zero pooled variance the result is `+T_SENTINEL`, `-T_SENTINEL` or
/// 0 according to the sign of the mean gap.
pub fn standardized_difference(mean_out: f64, mean_in: f64, var_out: f64, var_in: f64, m: usize) -> f64 {
    let gap = mean_out - mean_in;
    let pooled = var_out + var_in;
    if pooled > 0.0 {
        return gap / (pooled / m as f64).sqrt();
    }
    match gap.partial_cmp(&0.0) {
        Some(Ordering::Greater) => T_SENTINEL,
        Some(Ordering::Less) => -T_SENTINEL,
        _ => 0.0,
    }
}

/// `T` for two equal-length blocks of log scores.
pub fn t_statistic(out_logs: &[f64], in_logs: &[f64]) -> Result<f64> {
    if out_logs.len() != in_logs.len() {
        return Err(Error::LengthMismatch {
            left: out_logs.len(),
            right: in_logs.len(),
        });
    }
    if out_logs.len() < 2 {
        return Err(Error::TooFewValues {
            needed: 2,
            found: out_logs.len(),
        });
    }
    let (mo, vo) = mean_var(out_logs);
    let (mi, vi) = mean_var(in_logs);
    Ok(standardized_difference(mo, mi, vo, vi, out_logs.len()))
}

fn cell_stats(c: f64, k: usize, out: &[f64], inl: &[f64]) -> CellStats {
    let m = out.len();
    let (mean_out, var_out) = mean_var(out);
    let (mean_in, var_in) = mean_var(inl);
    CellStats {
        c,
        k,
        m,
        mean_out,
        mean_in,
        var_out,
        var_in,
        t: standardized_difference(mean_out, mean_in, var_out, var_in, m),
    }
}

/// Index of the cell with the largest `T`; the first (smallest `k`) wins ties.
pub fn select_k_for_c(cells: &[CellStats]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, cell) in cells.iter().enumerate() {
        if best.is_none_or(|b| cell.t > cells[b].t) {
            best = Some(i);
        }
    }
    best
}

/// Index of the summary with the largest quantile; smallest `c` wins ties.
pub fn select_c(per_c: &[ContaminationStats]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in per_c.iter().enumerate() {
        if best.is_none_or(|b| s.quantile > per_c[b].quantile) {
            best = Some(i);
        }
    }
    best
}

/// `P(Z < t)` for `Z` noncentral t, with the zero-variance sentinels mapped
/// to their limits.
pub fn sentinel_aware_quantile(t: f64, df: f64, ncp: f64) -> Result<f64> {
    if t == T_SENTINEL {
        return Ok(1.0);
    }
    if t == -T_SENTINEL {
        return Ok(0.0);
    }
    if ncp == T_SENTINEL {
        return Ok(0.0);
    }
    if ncp == -T_SENTINEL {
        return Ok(1.0);
    }
    noncentral_t_cdf(t, NctParams::new(df, ncp)?)
}

/// Summary for one `c` from its cells, which must share `c` and `m` and be
/// in ascending `k`.
pub fn summarize_contamination(cells: &[CellStats]) -> Result<ContaminationStats> {
    let best = select_k_for_c(cells)
        .ok_or_else(|| Error::InvalidGrid("no neighborhood sizes".into()))?;
    let (c, m) = (cells[best].c, cells[best].m);
    let len = cells.len() as f64;
    let avg = |f: fn(&CellStats) -> f64| cells.iter().map(f).sum::<f64>() / len;
    let ncp = standardized_difference(
        avg(|s| s.mean_out),
        avg(|s| s.mean_in),
        avg(|s| s.var_out),
        avg(|s| s.var_in),
        m,
    );
    let df = (2 * m - 2) as f64;
    let t_opt = cells[best].t;
    Ok(ContaminationStats {
        c,
        m,
        df,
        ncp,
        k_opt: cells[best].k,
        t_opt,
        quantile: sentinel_aware_quantile(t_opt, df, ncp)?,
    })
}

/// Every `(c, k)` cell and per-`c` summary for `data` on `grid`.
pub fn score_table(data: &Dataset, grid: &TuningGrid) -> Result<LofScoreTable> {
    let n = data.n();
    grid.check_feasible(n)?;
    let k_max = grid.k_max();
    if k_max + 1 > n {
        return Err(Error::KOutOfRange { k: k_max, n });
    }
    let index = NeighborIndex::build(data);
    let table = index.neighbor_lists_up_to_k(k_max)?;
    let m_max = grid
        .contaminations()
        .iter()
        .map(|&c| block_size(c, n))
        .max()
        .unwrap_or(0);

    // by_k[j][i]: cell for k_j and c_i
    let by_k: Vec<Vec<CellStats>> = grid
        .neighborhood_sizes()
        .par_iter()
        .map(|&k| {
            let scores = scores_from_table(&table, k).scores;
            let order = top_ranked(&scores, 2 * m_max);
            grid.contaminations()
                .iter()
                .map(|&c| {
                    let m = block_size(c, n);
                    let (out, inl) = block_logs(&scores, &order, m);
                    cell_stats(c, k, &out, &inl)
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::with_capacity(grid.contaminations().len() * by_k.len());
    let mut per_c = Vec::with_capacity(grid.contaminations().len());
    for ci in 0..grid.contaminations().len() {
        let column: Vec<CellStats> = by_k.iter().map(|row| row[ci].clone()).collect();
        per_c.push(summarize_contamination(&column)?);
        cells.extend(column);
    }
    Ok(LofScoreTable { n, cells, per_c })
}

/// Tunes `(c, k)` on `data` and returns the fitted model.
pub fn tune(data: &Dataset, grid: &TuningGrid) -> Result<TunedModel> {
    let table = score_table(data, grid)?;
    let best = select_c(&table.per_c).expect("non-empty grid");
    let (c_opt, k_opt) = (table.per_c[best].c, table.per_c[best].k_opt);
    TunedModel::fit(data.clone(), k_opt, c_opt, None, Some(table))
}

/// Projects `data` with `spec`, tunes on the projected points and keeps the
/// projection in the model.
pub fn tune_with_projection(data: &Dataset, grid: &TuningGrid, spec: ProjectionSpec) -> Result<TunedModel> {
    let projected = project(data, &spec)?;
    let table = score_table(&projected, grid)?;
    let best = select_c(&table.per_c).expect("non-empty grid");
    let (c_opt, k_opt) = (table.per_c[best].c, table.per_c[best].k_opt);
    TunedModel::fit(projected, k_opt, c_opt, Some(spec), Some(table))
}
