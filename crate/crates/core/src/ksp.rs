//! K shortest loopless paths (Yen) on the collapsed simple graph.
//!
//! Spur searches run A* guided by the exact distance to the target in the
//! unrestricted graph, which stays admissible once nodes and edges are
//! banned. Spur edges that are bridges are skipped outright: no detour
//! around them exists.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};
use crate::grid_model::GridGraph;
use crate::shortest::dijkstra;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPath {
    pub nodes: Vec<usize>,
    pub weight: f64,
}

impl WeightedPath {
    pub fn hops(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

/// Weight of the simple-graph edge `a - b`.
pub fn edge_weight(g: &GridGraph, a: usize, b: usize) -> Option<f64> {
    let list = g.neighbors(a);
    list.binary_search_by(|&(w, _)| w.cmp(&b)).ok().map(|i| list[i].1)
}

/// Sum of edge weights along `nodes`, left to right.
pub fn path_weight(g: &GridGraph, nodes: &[usize]) -> Option<f64> {
    nodes.windows(2).try_fold(0.0, |acc, w| edge_weight(g, w[0], w[1]).map(|x| acc + x))
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate(WeightedPath);

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .weight
            .total_cmp(&other.0.weight)
            .then(self.0.nodes.len().cmp(&other.0.nodes.len()))
            .then_with(|| self.0.nodes.cmp(&other.0.nodes))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable state for repeated queries on one graph.
pub struct PathFinder<'g> {
    g: &'g GridGraph,
    bridges: HashSet<(usize, usize)>,
}

/// Per-thread scratch arrays, reset in O(1) with a generation stamp.
pub struct SearchScratch {
    stamp: u32,
    seen: Vec<u32>,
    banned: Vec<u32>,
    dist: Vec<f64>,
    parent: Vec<usize>,
    heap: BinaryHeap<Reverse<Entry>>,
}

impl SearchScratch {
    pub fn new(n: usize) -> Self {
        SearchScratch {
            stamp: 0,
            seen: vec![0; n],
            banned: vec![0; n],
            dist: vec![0.0; n],
            parent: vec![usize::MAX; n],
            heap: BinaryHeap::new(),
        }
    }

    fn next_stamp(&mut self) -> u32 {
        if self.stamp == u32::MAX {
            self.seen.fill(0);
            self.banned.fill(0);
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stamp
    }
}

impl<'g> PathFinder<'g> {
    pub fn new(g: &'g GridGraph) -> Self {
        PathFinder {
            g,
            bridges: bridges(g),
        }
    }

    pub fn is_bridge(&self, a: usize, b: usize) -> bool {
        self.bridges.contains(&(a.min(b), a.max(b)))
    }

    /// Up to `k` loopless `s`-`t` paths in non-decreasing weight. `to_target`
    /// must hold the shortest distance from every node to `t`.
    pub fn k_shortest(
        &self,
        s: usize,
        t: usize,
        k: usize,
        to_target: &[f64],
        scratch: &mut SearchScratch,
    ) -> Vec<WeightedPath> {
        let mut found: Vec<WeightedPath> = Vec::with_capacity(k);
        if k == 0 || !to_target[s].is_finite() {
            return found;
        }
        if s == t {
            found.push(WeightedPath {
                nodes: vec![s],
                weight: 0.0,
            });
            return found;
        }
        let first = self
            .search(s, t, &[], &[], to_target, scratch)
            .expect("target reachable");
        found.push(first);
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        seen.insert(found[0].nodes.clone());
        let mut candidates: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();

        while found.len() < k {
            let last = found.last().expect("nonempty").nodes.clone();
            for i in 0..last.len() - 1 {
                let spur = last[i];
                let root = &last[..=i];
                let mut banned_first: Vec<usize> = found
                    .iter()
                    .filter(|p| p.nodes.len() > i + 1 && p.nodes[..=i] == *root)
                    .map(|p| p.nodes[i + 1])
                    .collect();
                banned_first.sort_unstable();
                banned_first.dedup();
                if self.is_bridge(spur, last[i + 1]) {
                    continue;
                }
                let Some(tail) = self.search(spur, t, &root[..i], &banned_first, to_target, scratch) else {
                    continue;
                };
                let mut nodes = root[..i].to_vec();
                nodes.extend_from_slice(&tail.nodes);
                if seen.insert(nodes.clone()) {
                    let weight = path_weight(self.g, &nodes).expect("edges exist");
                    candidates.push(Reverse(Candidate(WeightedPath { nodes, weight })));
                }
            }
            match candidates.pop() {
                Some(Reverse(Candidate(p))) => found.push(p),
                None => break,
            }
        }
        found
    }

    /// A* from `from` to `t` avoiding `banned_nodes` and the first hops in
    /// `banned_first`.
    fn search(
        &self,
        from: usize,
        t: usize,
        banned_nodes: &[usize],
        banned_first: &[usize],
        h: &[f64],
        sc: &mut SearchScratch,
    ) -> Option<WeightedPath> {
        let stamp = sc.next_stamp();
        for &v in banned_nodes {
            sc.banned[v] = stamp;
        }
        sc.heap.clear();
        sc.seen[from] = stamp;
        sc.dist[from] = 0.0;
        sc.parent[from] = usize::MAX;
        sc.heap.push(Reverse(Entry(h[from], from)));
        let mut done = false;
        while let Some(Reverse(Entry(f, u))) = sc.heap.pop() {
            if f > sc.dist[u] + h[u] {
                continue;
            }
            if u == t {
                done = true;
                break;
            }
            for &(w, wt) in self.g.neighbors(u) {
                if sc.banned[w] == stamp || (u == from && banned_first.binary_search(&w).is_ok()) {
                    continue;
                }
                if !h[w].is_finite() {
                    continue;
                }
                let nd = sc.dist[u] + wt;
                if sc.seen[w] != stamp || nd < sc.dist[w] {
                    sc.seen[w] = stamp;
                    sc.dist[w] = nd;
                    sc.parent[w] = u;
                    sc.heap.push(Reverse(Entry(nd + h[w], w)));
                }
            }
        }
        if !done {
            return None;
        }
        let mut nodes = vec![t];
        let mut v = t;
        while v != from {
            v = sc.parent[v];
            nodes.push(v);
        }
        nodes.reverse();
        Some(WeightedPath {
            nodes,
            weight: sc.dist[t],
        })
    }
}

/// Convenience wrapper for a single query.
pub fn k_shortest_paths(g: &GridGraph, s: usize, t: usize, k: usize) -> Result<Vec<WeightedPath>> {
    for v in [s, t] {
        if v >= g.order() {
            return Err(GridError::UnknownVertex(v));
        }
    }
    let finder = PathFinder::new(g);
    let to_target = dijkstra(g, t);
    Ok(finder.k_shortest(s, t, k, &to_target, &mut SearchScratch::new(g.order())))
}

/// Bridges of the simple graph as `(min, max)` pairs (iterative Tarjan).
pub fn bridges(g: &GridGraph) -> HashSet<(usize, usize)> {
    let n = g.order();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut out = HashSet::new();
    let mut time = 0;
    // (node, parent, next neighbour position)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(&mut (u, parent, ref mut pos)) = stack.last_mut() {
            let nbrs = g.neighbors(u);
            if *pos < nbrs.len() {
                let w = nbrs[*pos].0;
                *pos += 1;
                if w == parent {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, u, 0));
                } else {
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[u]);
                    if low[u] > disc[parent] {
                        out.insert((u.min(parent), u.max(parent)));
                    }
                }
            }
        }
    }
    out
}
