//! Betweenness and eigenvector centrality.
//!
//! Betweenness uses Brandes' dependency accumulation over hop-shortest or
//! minimum-resistance paths. Sources are processed in fixed-size chunks whose
//! partial sums are combined in chunk order, which keeps results identical for
//! any worker count.

use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};
use crate::grid_model::GridGraph;
use crate::shortest::weights_equal;

const SOURCE_CHUNK: usize = 32;

/// How a vertex is credited for a pair with several shortest paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PathCredit {
    /// sigma_st(v) / sigma_st, the usual fractional share.
    #[default]
    Share,
    /// sigma_st(v): raw number of shortest paths through v.
    RawCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetweennessVector {
    pub values: Vec<f64>,
    pub weighted_paths: bool,
    pub credit: PathCredit,
}

/// Betweenness with fractional path credit. Endpoints are excluded and each
/// unordered pair counts once.
pub fn betweenness(g: &GridGraph, use_weights: bool) -> Result<BetweennessVector> {
    betweenness_with(g, use_weights, PathCredit::Share)
}

pub fn betweenness_with(g: &GridGraph, use_weights: bool, credit: PathCredit) -> Result<BetweennessVector> {
    g.require_connected(1)?;
    Ok(BetweennessVector {
        values: betweenness_values(g, use_weights, credit),
        weighted_paths: use_weights,
        credit,
    })
}

/// Betweenness on a possibly disconnected graph; unreachable pairs contribute
/// nothing, so the result equals the per-component values side by side.
pub fn betweenness_values(g: &GridGraph, use_weights: bool, credit: PathCredit) -> Vec<f64> {
    let n = g.order();
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut scratch = Scratch::new(n);
            for &s in chunk {
                if use_weights {
                    scratch.dijkstra_dag(g, s);
                } else {
                    scratch.bfs_dag(g, s);
                }
                scratch.accumulate(s, credit, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    for t in &mut total {
        *t /= 2.0;
    }
    total
}

struct Scratch {
    order: Vec<usize>,
    preds: Vec<Vec<usize>>,
    sigma: Vec<f64>,
    dist_hops: Vec<usize>,
    dist_w: Vec<f64>,
    done: Vec<bool>,
    delta: Vec<f64>,
}

#[derive(PartialEq)]
struct Entry(f64, usize);
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            order: Vec::with_capacity(n),
            preds: vec![Vec::new(); n],
            sigma: vec![0.0; n],
            dist_hops: vec![usize::MAX; n],
            dist_w: vec![f64::INFINITY; n],
            done: vec![false; n],
            delta: vec![0.0; n],
        }
    }

    fn reset(&mut self) {
        self.order.clear();
        for p in &mut self.preds {
            p.clear();
        }
        self.sigma.fill(0.0);
        self.dist_hops.fill(usize::MAX);
        self.dist_w.fill(f64::INFINITY);
        self.done.fill(false);
        self.delta.fill(0.0);
    }

    fn bfs_dag(&mut self, g: &GridGraph, s: usize) {
        self.reset();
        self.sigma[s] = 1.0;
        self.dist_hops[s] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            self.order.push(u);
            for &(v, _) in g.neighbors(u) {
                if self.dist_hops[v] == usize::MAX {
                    self.dist_hops[v] = self.dist_hops[u] + 1;
                    queue.push_back(v);
                }
                if self.dist_hops[v] == self.dist_hops[u] + 1 {
                    self.sigma[v] += self.sigma[u];
                    self.preds[v].push(u);
                }
            }
        }
    }

    fn dijkstra_dag(&mut self, g: &GridGraph, s: usize) {
        self.reset();
        self.sigma[s] = 1.0;
        self.dist_w[s] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Entry(0.0, s));
        while let Some(Entry(_, u)) = heap.pop() {
            if self.done[u] {
                continue;
            }
            self.done[u] = true;
            self.order.push(u);
            for &(v, w) in g.neighbors(u) {
                if self.done[v] {
                    continue;
                }
                let nd = self.dist_w[u] + w;
                if weights_equal(nd, self.dist_w[v]) {
                    self.sigma[v] += self.sigma[u];
                    self.preds[v].push(u);
                } else if nd < self.dist_w[v] {
                    self.dist_w[v] = nd;
                    self.sigma[v] = self.sigma[u];
                    self.preds[v].clear();
                    self.preds[v].push(u);
                    heap.push(Entry(nd, v));
                }
            }
        }
    }

    fn accumulate(&mut self, s: usize, credit: PathCredit, acc: &mut [f64]) {
        // delta holds the pair dependency (Share) or the count of DAG paths
        // leaving the vertex (RawCount)
        for &w in self.order.iter().rev() {
            let coeff = match credit {
                PathCredit::Share => (1.0 + self.delta[w]) / self.sigma[w],
                PathCredit::RawCount => 1.0 + self.delta[w],
            };
            for &v in &self.preds[w] {
                self.delta[v] += match credit {
                    PathCredit::Share => self.sigma[v] * coeff,
                    PathCredit::RawCount => coeff,
                };
            }
            if w != s {
                acc[w] += match credit {
                    PathCredit::Share => self.delta[w],
                    PathCredit::RawCount => self.sigma[w] * self.delta[w],
                };
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub node: usize,
    pub id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityRanking {
    pub entries: Vec<RankEntry>,
    pub weighted: bool,
    pub iterations: usize,
}

impl CentralityRanking {
    /// Scores indexed by node.
    pub fn scores(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.entries.len()];
        for e in &self.entries {
            out[e.node] = e.score;
        }
        out
    }

    pub fn top(&self, k: usize) -> &[RankEntry] {
        &self.entries[..k.min(self.entries.len())]
    }
}

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Dominant eigenvector of the (weighted) adjacency matrix by shifted power
/// iteration, unit Euclidean norm, positive sign.
///
/// Power grids are close to trees and therefore often bipartite, where the
/// adjacency spectrum is symmetric and plain power iteration oscillates. The
/// iteration runs on A + cI with c set to half the current Rayleigh quotient,
/// which leaves the eigenvectors unchanged.
pub fn eigenvector_scores(g: &GridGraph, use_weights: bool) -> Result<(Vec<f64>, usize)> {
    g.require_connected(1)?;
    let n = g.order();
    let weight = |w: f64| if use_weights { w } else { 1.0 };
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=EIGEN_MAX_ITERATIONS {
        for (v, yv) in y.iter_mut().enumerate() {
            *yv = g.neighbors(v).iter().map(|&(u, w)| weight(w) * x[u]).sum();
        }
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let shift = 0.5 * rayleigh.max(0.0);
        for (yv, xv) in y.iter_mut().zip(&x) {
            *yv += shift * xv;
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(GridError::Eigensolver("zero iterate".into()));
        }
        residual = 0.0;
        for (yv, xv) in y.iter_mut().zip(x.iter()) {
            *yv /= norm;
            residual = residual.max((*yv - xv).abs());
        }
        std::mem::swap(&mut x, &mut y);
        if residual < EIGEN_TOLERANCE {
            fix_sign(&mut x);
            if x.iter().any(|&v| v < 0.0) {
                return Err(GridError::Eigensolver("dominant eigenvector has mixed signs".into()));
            }
            return Ok((x, it));
        }
    }
    Err(GridError::NotConverged {
        residual,
        iterations: EIGEN_MAX_ITERATIONS,
    })
}

fn fix_sign(x: &mut [f64]) {
    if let Some(&first) = x.iter().find(|v| v.abs() > 0.0) {
        if first < 0.0 {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
    }
}

/// Ranks nodes by eigenvector centrality; ties (to 1e-12) go to the lower index.
pub fn eigenvector_centrality(g: &GridGraph, use_weights: bool) -> Result<CentralityRanking> {
    let (scores, iterations) = eigenvector_scores(g, use_weights)?;
    Ok(CentralityRanking {
        entries: rank_scores(g, &scores),
        weighted: use_weights,
        iterations,
    })
}

pub(crate) fn rank_scores(g: &GridGraph, scores: &[f64]) -> Vec<RankEntry> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse((scores[i] * 1e12).round() as i64), i));
    idx.into_iter()
        .enumerate()
        .map(|(r, i)| RankEntry {
            rank: r + 1,
            node: i,
            id: g.node(i).id.clone(),
            score: scores[i],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{complete, graph, star};

    #[test]
    fn path_betweenness() {
        let g = graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(betweenness(&g, false).unwrap().values, vec![0.0, 1.0, 0.0]);
        assert_eq!(betweenness(&g, true).unwrap().values, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn four_cycle_share() {
        let g = graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        assert_eq!(betweenness(&g, false).unwrap().values, vec![0.5; 4]);
        assert_eq!(betweenness(&g, true).unwrap().values, vec![0.5; 4]);
        let raw = betweenness_with(&g, false, PathCredit::RawCount).unwrap();
        assert_eq!(raw.values, vec![1.0; 4]);
    }

    #[test]
    fn star_centre() {
        let b = betweenness(&star(5), false).unwrap();
        assert_eq!(b.values[0], 6.0);
        assert!(b.values[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn weighted_paths_follow_resistance() {
        // heavy direct edge 0-2 is bypassed through 1
        let g = graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]);
        assert_eq!(betweenness(&g, false).unwrap().values, vec![0.0; 3]);
        assert_eq!(betweenness(&g, true).unwrap().values, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn disconnected_rejected_but_values_available() {
        let g = graph(6, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0)]);
        assert!(betweenness(&g, false).is_err());
        assert_eq!(
            betweenness_values(&g, false, PathCredit::Share),
            vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn star_eigenvector() {
        let r = eigenvector_centrality(&star(4), false).unwrap();
        assert_eq!(r.entries[0].node, 0);
        let s = r.scores();
        assert!((s[1] - s[2]).abs() < 1e-9 && (s[2] - s[3]).abs() < 1e-9);
        // leaves tie, lower index first
        assert_eq!(r.entries.iter().map(|e| e.node).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        let norm: f64 = s.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complete_eigenvector_uniform() {
        let r = eigenvector_centrality(&complete(4), true).unwrap();
        for e in &r.entries {
            assert!((e.score - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvector_on_long_path_converges() {
        let edges: Vec<_> = (0..40).map(|i| (i, i + 1, 1.0)).collect();
        let g = graph(41, &edges);
        let r = eigenvector_centrality(&g, false).unwrap();
        assert_eq!(r.entries[0].node, 20);
        assert!(r.entries.iter().all(|e| e.score > 0.0));
    }

    #[test]
    fn eigenvector_rejects_disconnected() {
        let g = graph(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        assert!(matches!(eigenvector_centrality(&g, false), Err(GridError::Disconnected { .. })));
    }
}
