//! Single-source shortest-path kernels shared by the metric modules.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::grid_model::GridGraph;

/// Relative tolerance under which two path weights count as equal.
pub const WEIGHT_RTOL: f64 = 1e-12;

pub fn weights_equal(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= WEIGHT_RTOL * a.abs().max(b.abs()))
}

/// Hop distances from `source`; unreachable nodes get `usize::MAX`.
pub fn bfs_hops(g: &GridGraph, source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.order()];
    let mut queue = VecDeque::with_capacity(g.order());
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u] + 1;
        for &(w, _) in g.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = du;
                queue.push_back(w);
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    dist: f64,
    hops: usize,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // min-heap on (dist, hops, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Minimum-weight distances from `source` together with the hop count of the
/// chosen path; among equal-weight paths the one with fewest hops wins.
/// Unreachable nodes get `f64::INFINITY` and `usize::MAX`.
pub fn dijkstra_with_hops(g: &GridGraph, source: usize) -> (Vec<f64>, Vec<usize>) {
    let n = g.order();
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    hops[source] = 0;
    heap.push(HeapEntry {
        dist: 0.0,
        hops: 0,
        node: source,
    });
    while let Some(HeapEntry { node: u, .. }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in g.neighbors(u) {
            if done[v] {
                continue;
            }
            let nd = dist[u] + w;
            let nh = hops[u] + 1;
            let better = if weights_equal(nd, dist[v]) {
                nh < hops[v]
            } else {
                nd < dist[v]
            };
            if better {
                dist[v] = dist[v].min(nd);
                hops[v] = nh;
                heap.push(HeapEntry {
                    dist: dist[v],
                    hops: nh,
                    node: v,
                });
            }
        }
    }
    (dist, hops)
}

/// Plain minimum-weight distances from `source`.
pub fn dijkstra(g: &GridGraph, source: usize) -> Vec<f64> {
    dijkstra_with_hops(g, source).0
}
