//! Exact k-nearest-neighbor search.
//!
//! Low-dimensional data (`p <= 20`) is indexed with a median-split kd-tree,
//! anything wider falls back to a brute-force scan. Both backends order
//! candidates by the same key, `(squared distance, row id)`, computed by the
//! same summation, so they return bit-identical lists.

use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Widest dimension indexed with a tree.
pub const TREE_MAX_DIM: usize = 20;
const LEAF_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    KdTree,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

/// Neighbors of one query, ascending by `(distance, id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub neighbors: Vec<Neighbor>,
    /// The `k` that was asked for; may exceed `neighbors.len()`.
    pub requested: usize,
}

impl NeighborList {
    /// How many neighbors were requested but could not be supplied.
    pub fn shortfall(&self) -> usize {
        self.requested - self.neighbors.len()
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Fixed-width neighbor lists for many queries, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    rows: usize,
    k_max: usize,
    ids: Vec<usize>,
    dists: Vec<f64>,
}

impl NeighborTable {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// The first `k` neighbor ids of row `i`.
    #[inline]
    pub fn ids(&self, i: usize, k: usize) -> &[usize] {
        debug_assert!(k <= self.k_max);
        &self.ids[i * self.k_max..i * self.k_max + k]
    }

    /// The first `k` neighbor distances of row `i`.
    #[inline]
    pub fn distances(&self, i: usize, k: usize) -> &[f64] {
        debug_assert!(k <= self.k_max);
        &self.dists[i * self.k_max..i * self.k_max + k]
    }

    /// Row `i` truncated to `k` entries as a [`NeighborList`].
    pub fn list(&self, i: usize, k: usize) -> NeighborList {
        let neighbors = self
            .ids(i, k)
            .iter()
            .zip(self.distances(i, k))
            .map(|(&id, &distance)| Neighbor { id, distance })
            .collect();
        NeighborList {
            neighbors,
            requested: k,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable search structure over a copy of the indexed points.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    n: usize,
    p: usize,
    kind: IndexKind,
    /// Points in slot order (tree order for the kd-tree).
    points: Vec<f64>,
    /// Original row id of each slot.
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

/// Candidate key: squared distance bits (order-preserving for non-negative
/// floats) then row id.
type Key = (u64, usize);

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

#[inline]
fn key(d2: f64, id: usize) -> Key {
    (d2.to_bits(), id)
}

/// Builds an index, choosing the backend from the dimension.
pub fn build_index(data: &Dataset) -> NeighborIndex {
    NeighborIndex::build(data)
}

impl NeighborIndex {
    pub fn build(data: &Dataset) -> Self {
        let kind = if data.p() <= TREE_MAX_DIM {
            IndexKind::KdTree
        } else {
            IndexKind::BruteForce
        };
        Self::build_with(data, kind)
    }

    pub fn build_with(data: &Dataset, kind: IndexKind) -> Self {
        let (n, p) = (data.n(), data.p());
        match kind {
            IndexKind::BruteForce => Self {
                n,
                p,
                kind,
                points: data.as_slice().to_vec(),
                ids: (0..n).collect(),
                nodes: Vec::new(),
            },
            IndexKind::KdTree => {
                let mut perm: Vec<usize> = (0..n).collect();
                let mut nodes = Vec::new();
                build_node(data, &mut perm, 0, n, &mut nodes);
                let mut points = Vec::with_capacity(n * p);
                for &i in &perm {
                    points.extend_from_slice(data.row(i));
                }
                Self {
                    n,
                    p,
                    kind,
                    points,
                    ids: perm,
                    nodes,
                }
            }
        }
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    fn slot(&self, s: usize) -> &[f64] {
        &self.points[s * self.p..(s + 1) * self.p]
    }

    /// The `k` nearest indexed rows to `query`, skipping row `exclude` if given.
    ///
    /// Asking for more neighbors than exist is not an error: the full list
    /// comes back and [`NeighborList::shortfall`] reports the difference.
    pub fn query_k_nearest(
        &self,
        query: &[f64],
        k: usize,
        exclude: Option<usize>,
    ) -> Result<NeighborList> {
        if query.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: query.len(),
            });
        }
        if k == 0 {
            return Err(Error::KOutOfRange { k, n: self.n });
        }
        let keys = self.search(query, k, exclude);
        let neighbors = keys
            .into_iter()
            .map(|(bits, id)| Neighbor {
                id,
                distance: f64::from_bits(bits).sqrt(),
            })
            .collect();
        Ok(NeighborList {
            neighbors,
            requested: k,
        })
    }

    /// Self-excluded neighbor lists of every indexed row, `k_max` wide.
    ///
    /// Row `i` truncated to any `k <= k_max` equals the direct `k` query.
    pub fn neighbor_lists_up_to_k(&self, k_max: usize) -> Result<NeighborTable> {
        if k_max == 0 || k_max > self.n.saturating_sub(1) {
            return Err(Error::KTooLarge {
                requested: k_max,
                available: self.n.saturating_sub(1),
            });
        }
        let mut ids = vec![0usize; self.n * k_max];
        let mut dists = vec![0f64; self.n * k_max];
        // slot s holds row self.ids[s]; walk slots for locality, write by row
        let mut by_row: Vec<usize> = vec![0; self.n];
        for (s, &id) in self.ids.iter().enumerate() {
            by_row[id] = s;
        }
        ids.par_chunks_mut(k_max)
            .zip(dists.par_chunks_mut(k_max))
            .enumerate()
            .for_each(|(row, (id_out, d_out))| {
                let q = self.slot(by_row[row]);
                let keys = self.search(q, k_max, Some(row));
                for (j, (bits, id)) in keys.into_iter().enumerate() {
                    id_out[j] = id;
                    d_out[j] = f64::from_bits(bits).sqrt();
                }
            });
        Ok(NeighborTable {
            rows: self.n,
            k_max,
            ids,
            dists,
        })
    }

    /// Neighbor lists of external query points (no exclusion), `k` wide.
    pub fn query_many(&self, queries: &Dataset, k: usize) -> Result<NeighborTable> {
        if queries.p() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: queries.p(),
            });
        }
        if k == 0 || k > self.n {
            return Err(Error::KTooLarge {
                requested: k,
                available: self.n,
            });
        }
        let rows = queries.n();
        let mut ids = vec![0usize; rows * k];
        let mut dists = vec![0f64; rows * k];
        ids.par_chunks_mut(k)
            .zip(dists.par_chunks_mut(k))
            .enumerate()
            .for_each(|(row, (id_out, d_out))| {
                let keys = self.search(queries.row(row), k, None);
                for (j, (bits, id)) in keys.into_iter().enumerate() {
                    id_out[j] = id;
                    d_out[j] = f64::from_bits(bits).sqrt();
                }
            });
        Ok(NeighborTable {
            rows,
            k_max: k,
            ids,
            dists,
        })
    }

    /// Sorted keys of the `k` best candidates.
    fn search(&self, q: &[f64], k: usize, exclude: Option<usize>) -> Vec<Key> {
        match self.kind {
            IndexKind::BruteForce => self.search_brute(q, k, exclude),
            IndexKind::KdTree => {
                let mut heap = BinaryHeap::with_capacity(k + 1);
                if !self.nodes.is_empty() {
                    self.search_node(0, q, k, exclude, &mut heap);
                }
                let mut keys = heap.into_vec();
                keys.sort_unstable();
                keys
            }
        }
    }

    fn search_brute(&self, q: &[f64], k: usize, exclude: Option<usize>) -> Vec<Key> {
        let mut keys: Vec<Key> = (0..self.n)
            .filter(|&s| Some(self.ids[s]) != exclude)
            .map(|s| key(sq_dist(q, self.slot(s)), self.ids[s]))
            .collect();
        if k < keys.len() {
            keys.select_nth_unstable(k - 1);
            keys.truncate(k);
        }
        keys.sort_unstable();
        keys
    }

    fn search_node(
        &self,
        node: usize,
        q: &[f64],
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Key>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for s in start..end {
                    let id = self.ids[s];
                    if Some(id) == exclude {
                        continue;
                    }
                    let cand = key(sq_dist(q, self.slot(s)), id);
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search_node(near, q, k, exclude, heap);
                // far-side points are at least |diff| away along `dim`; ties
                // must still be visited since a smaller id may sit there
                let bound = diff * diff;
                if heap.len() < k || bound <= f64::from_bits(heap.peek().unwrap().0) {
                    self.search_node(far, q, k, exclude, heap);
                }
            }
        }
    }
}

fn build_node(
    data: &Dataset,
    perm: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let idx = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return idx;
    }
    let p = data.p();
    let mut best_dim = 0;
    let mut best_spread = -1.0;
    for dim in 0..p {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &i in &perm[start..end] {
            let v = data.row(i)[dim];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo > best_spread {
            best_spread = hi - lo;
            best_dim = dim;
        }
    }
    if best_spread <= 0.0 {
        // all points coincide
        nodes.push(Node::Leaf { start, end });
        return idx;
    }
    let mid = start + (end - start) / 2;
    perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        data.row(a)[best_dim].total_cmp(&data.row(b)[best_dim])
    });
    let value = data.row(perm[mid])[best_dim];
    nodes.push(Node::Leaf { start, end }); // placeholder
    let left = build_node(data, perm, start, mid, nodes);
    let right = build_node(data, perm, mid, end, nodes);
    nodes[idx] = Node::Split {
        dim: best_dim,
        value,
        left,
        right,
    };
    idx
}
