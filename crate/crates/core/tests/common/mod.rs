//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the library's numerical paths; each oracle is a
//! direct, slow transcription of the defining formula.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(rng: &mut impl Rng, n: usize, p: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// k nearest neighbors

/// All other rows sorted by (distance, id), truncated to k.
pub fn brute_knn(rows: &[Vec<f64>], q: &[f64], k: usize, exclude: Option<usize>) -> Vec<(usize, f64)> {
    let mut all: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, r)| {
            let d2: f64 = q.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.truncate(k);
    all.into_iter().map(|(d2, i)| (i, d2.sqrt())).collect()
}

// ---------------------------------------------------------------------------
// local outlier factor

pub struct BruteLof {
    pub scores: Vec<f64>,
    pub lrd: Vec<f64>,
    pub kdist: Vec<f64>,
    pub neighbors: Vec<Vec<usize>>,
}

/// Literal transcription of k-distance, reachability distance, local
/// reachability density and LOF, with self excluded and the 1e-12 floor on
/// the mean reachability distance.
pub fn brute_lof(rows: &[Vec<f64>], k: usize) -> BruteLof {
    let n = rows.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            brute_knn(rows, &rows[i], k, Some(i))
                .into_iter()
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let kdist: Vec<f64> = (0..n)
        .map(|i| euclid(&rows[i], &rows[*neighbors[i].last().unwrap()]))
        .collect();
    let reach = |a: usize, b: usize| kdist[b].max(euclid(&rows[a], &rows[b]));
    let lrd: Vec<f64> = (0..n)
        .map(|a| {
            let mean: f64 = neighbors[a].iter().map(|&b| reach(a, b)).sum::<f64>() / k as f64;
            1.0 / mean.max(1e-12)
        })
        .collect();
    let scores = (0..n)
        .map(|a| {
            let mean: f64 = neighbors[a].iter().map(|&b| lrd[b]).sum::<f64>() / k as f64;
            mean / lrd[a]
        })
        .collect();
    BruteLof {
        scores,
        lrd,
        kdist,
        neighbors,
    }
}

/// Novelty LOF of `q` against training rows with brute-force LOF fitted at `k`.
pub fn brute_novelty(rows: &[Vec<f64>], fit: &BruteLof, k: usize, q: &[f64]) -> f64 {
    let nb = brute_knn(rows, q, k, None);
    let mean_reach: f64 = nb.iter().map(|&(b, _)| fit.kdist[b].max(euclid(q, &rows[b]))).sum::<f64>() / k as f64;
    let lrd_q = 1.0 / mean_reach.max(1e-12);
    let mean_lrd: f64 = nb.iter().map(|&(b, _)| fit.lrd[b]).sum::<f64>() / k as f64;
    mean_lrd / lrd_q
}

// ---------------------------------------------------------------------------
// noncentral t

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp;
        loop {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..order {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = order as f64 * (z * p0 - p1) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p0 / dp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[order - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// P(T < x) for noncentral t by composite Gauss-Legendre quadrature of
/// E[Phi(x S - ncp)], S the chi distribution scaled by 1/sqrt(df).
pub struct NctOracle {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for NctOracle {
    fn default() -> Self {
        let (nodes, weights) = gauss_legendre(20);
        Self { nodes, weights }
    }
}

impl NctOracle {
    pub fn cdf(&self, x: f64, df: f64, ncp: f64) -> f64 {
        let half = df / 2.0;
        let ln_norm = std::f64::consts::LN_2 + half * half.ln() - libm::lgamma(half);
        let f = |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let dens = (ln_norm + (df - 1.0) * s.ln() - half * s * s).exp();
            std_normal_cdf(x * s - ncp) * dens
        };
        let sd = (0.5 / df).sqrt();
        let center = (1.0 - 1.0 / df).max(0.0).sqrt();
        let lo = (center - 50.0 * sd).max(0.0);
        let hi = center + 50.0 * sd + 2.0 / df.sqrt();
        // fine uniform panels, plus extra panels around the step of Phi
        let mut breaks: Vec<f64> = (0..=4000).map(|i| lo + (hi - lo) * i as f64 / 4000.0).collect();
        if x != 0.0 {
            let s0 = ncp / x;
            let w = 1.0 / x.abs();
            for i in -200..=200 {
                let b = s0 + w * i as f64 / 20.0;
                if b > lo && b < hi {
                    breaks.push(b);
                }
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let mut acc = 0.0;
            for (t, wt) in self.nodes.iter().zip(&self.weights) {
                acc += wt * f(c + h * t);
            }
            total += acc * h;
        }
        total
    }
}

// ---------------------------------------------------------------------------
// metrics

/// AUC by counting every (anomaly, normal) pair, ties worth one half.
pub fn auc_pairs(truth: &[bool], scores: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &ti) in truth.iter().enumerate() {
        if !ti {
            continue;
        }
        for (j, &tj) in truth.iter().enumerate() {
            if tj {
                continue;
            }
            den += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / den
}

pub fn f1_by_hand(truth: &[bool], pred: &[bool]) -> f64 {
    let tp = truth.iter().zip(pred).filter(|(t, p)| **t && **p).count() as f64;
    let fp = truth.iter().zip(pred).filter(|(t, p)| !**t && **p).count() as f64;
    let fnn = truth.iter().zip(pred).filter(|(t, p)| **t && !**p).count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let precision = tp / (tp + fp);
    let recall = tp / (tp + fnn);
    2.0 * precision * recall / (precision + recall)
}

// ---------------------------------------------------------------------------
// tuning

/// Every other row of each row, sorted by (distance, id); computed once and
/// truncated per k.
pub fn all_sorted_neighbors(rows: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
    (0..rows.len())
        .map(|i| brute_knn(rows, &rows[i], rows.len(), Some(i)))
        .collect()
}

/// Brute-force LOF at k from precomputed full neighbor orderings.
pub fn brute_lof_from_sorted(rows: &[Vec<f64>], sorted: &[Vec<(usize, f64)>], k: usize) -> BruteLof {
    let n = rows.len();
    let neighbors: Vec<Vec<usize>> = sorted.iter().map(|s| s[..k].iter().map(|p| p.0).collect()).collect();
    let kdist: Vec<f64> = (0..n).map(|i| sorted[i][k - 1].1).collect();
    let mut lrd = vec![0.0; n];
    for a in 0..n {
        let mut total = 0.0;
        for &b in &neighbors[a] {
            total += kdist[b].max(euclid(&rows[a], &rows[b]));
        }
        lrd[a] = 1.0 / (total / k as f64).max(1e-12);
    }
    let mut scores = vec![0.0; n];
    for a in 0..n {
        let mut total = 0.0;
        for &b in &neighbors[a] {
            total += lrd[b];
        }
        scores[a] = total / k as f64 / lrd[a];
    }
    BruteLof {
        scores,
        lrd,
        kdist,
        neighbors,
    }
}

#[derive(Debug, Clone)]
pub struct OracleCell {
    pub c: f64,
    pub k: usize,
    pub mean_out: f64,
    pub mean_in: f64,
    pub var_out: f64,
    pub var_in: f64,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct OraclePerC {
    pub c: f64,
    pub df: f64,
    pub ncp: f64,
    pub k_opt: usize,
    pub quantile: f64,
}

#[derive(Debug, Clone)]
pub struct OracleTune {
    pub cells: Vec<OracleCell>,
    pub per_c: Vec<OraclePerC>,
    pub c_opt: f64,
    pub k_opt: usize,
    pub threshold: f64,
}

fn two_pass_moments(xs: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    for x in xs {
        mean += x;
    }
    mean /= xs.len() as f64;
    let mut ss = 0.0;
    for x in xs {
        ss += (x - mean).powi(2);
    }
    (mean, ss / (xs.len() - 1) as f64)
}

fn guarded_ratio(gap: f64, pooled: f64, m: usize) -> f64 {
    if pooled == 0.0 {
        if gap > 0.0 {
            f64::MAX
        } else if gap < 0.0 {
            -f64::MAX
        } else {
            0.0
        }
    } else {
        gap / (pooled / m as f64).sqrt()
    }
}

/// Straight-line transcription of the tuning loop: brute-force LOF per k,
/// rank blocks, log moments, T, per-c argmax over k, k-averaged moments for
/// the noncentrality, quadrature-oracle quantile, argmax over c.
pub fn oracle_tune(rows: &[Vec<f64>], cs: &[f64], ks: &[usize]) -> OracleTune {
    let n = rows.len();
    let sorted = all_sorted_neighbors(rows);
    let nct = NctOracle::default();
    let block = |c: f64| ((c * n as f64 * 1e6).round() / 1e6).floor() as usize;
    let lofs: Vec<Vec<f64>> = ks.iter().map(|&k| brute_lof_from_sorted(rows, &sorted, k).scores).collect();
    let mut cells = Vec::new();
    let mut per_c = Vec::new();
    for &c in cs {
        let m = block(c);
        let mut row = Vec::new();
        for (ki, &k) in ks.iter().enumerate() {
            let s = &lofs[ki];
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| {
                let ra = (s[a] * 1e12).round();
                let rb = (s[b] * 1e12).round();
                rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
            });
            let out: Vec<f64> = idx[..m].iter().map(|&i| s[i].ln()).collect();
            let inl: Vec<f64> = idx[m..2 * m].iter().map(|&i| s[i].ln()).collect();
            let (mo, vo) = two_pass_moments(&out);
            let (mi, vi) = two_pass_moments(&inl);
            row.push(OracleCell {
                c,
                k,
                mean_out: mo,
                mean_in: mi,
                var_out: vo,
                var_in: vi,
                t: guarded_ratio(mo - mi, vo + vi, m),
            });
        }
        let mut best = 0;
        for j in 1..row.len() {
            if row[j].t > row[best].t {
                best = j;
            }
        }
        let len = row.len() as f64;
        let mo: f64 = row.iter().map(|r| r.mean_out).sum::<f64>() / len;
        let mi: f64 = row.iter().map(|r| r.mean_in).sum::<f64>() / len;
        let vo: f64 = row.iter().map(|r| r.var_out).sum::<f64>() / len;
        let vi: f64 = row.iter().map(|r| r.var_in).sum::<f64>() / len;
        let ncp = guarded_ratio(mo - mi, vo + vi, m);
        let df = (2 * m - 2) as f64;
        let t = row[best].t;
        let quantile = if t == f64::MAX || ncp == -f64::MAX {
            1.0
        } else if t == -f64::MAX || ncp == f64::MAX {
            0.0
        } else {
            nct.cdf(t, df, ncp).clamp(0.0, 1.0)
        };
        per_c.push(OraclePerC {
            c,
            df,
            ncp,
            k_opt: row[best].k,
            quantile,
        });
        cells.extend(row);
    }
    let mut best_c = 0;
    for j in 1..per_c.len() {
        if per_c[j].quantile > per_c[best_c].quantile {
            best_c = j;
        }
    }
    let c_opt = per_c[best_c].c;
    let k_opt = per_c[best_c].k_opt;
    let s = brute_lof_from_sorted(rows, &sorted, k_opt).scores;
    let mut desc = s.clone();
    desc.sort_by(|a, b| b.partial_cmp(a).unwrap());
    OracleTune {
        cells,
        per_c,
        c_opt,
        k_opt,
        threshold: desc[block(c_opt) - 1],
    }
}

/// Relative difference, with sentinel values compared exactly.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

// ---------------------------------------------------------------------------
// geometry

/// Even-odd ray casting toward +x.
pub fn ray_cast_inside(vertices: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = vertices.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (vertices[i][0], vertices[i][1]);
        let (xj, yj) = (vertices[j][0], vertices[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
pub fn ks_statistic(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sample.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Row vectors of a dataset.
pub fn rows_of(data: &loftune::Dataset) -> Vec<Vec<f64>> {
    data.rows().map(|r| r.to_vec()).collect()
}

/// Labeled score fixtures with both classes present; every other fixture
/// uses coarse scores so ties are common.
pub fn metric_fixtures(seed: u64, count: usize) -> Vec<(Vec<bool>, Vec<f64>)> {
    let mut r = rng(seed);
    (0..count)
        .map(|f| {
            let n = r.random_range(2..200);
            let mut truth: Vec<bool> = (0..n).map(|_| r.random_bool(0.3)).collect();
            truth[0] = true;
            truth[1] = false;
            let scores = (0..n)
                .map(|_| {
                    if f % 2 == 0 {
                        r.random_range(0..5) as f64
                    } else {
                        r.random_range(0.0..10.0)
                    }
                })
                .collect();
            (truth, scores)
        })
        .collect()
}
