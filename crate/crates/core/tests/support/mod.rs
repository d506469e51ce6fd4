//! Brute-force reference implementations used by the integration and
//! acceptance tests. Deliberately naive: dense matrices, exhaustive path
//! enumeration, no shared code with the library's kernels.
#![allow(dead_code)]

use gridnet_core::{build_graph, EdgeRecord, GridGraph, NodeKind, NodeRecord};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Simple undirected weighted graph as an edge list.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Fixture {
    pub fn graph(&self) -> GridGraph {
        let nodes = (0..self.n)
            .map(|i| NodeRecord::new(format!("v{i}"), NodeKind::Substation))
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|&(a, b, w)| EdgeRecord::cable(format!("v{a}"), format!("v{b}"), w, 1.0))
            .collect();
        build_graph(nodes, edges).expect("fixture is valid")
    }

    pub fn weight_matrix(&self) -> Vec<Vec<Option<f64>>> {
        let mut m = vec![vec![None; self.n]; self.n];
        for &(a, b, w) in &self.edges {
            m[a][b] = Some(w);
            m[b][a] = Some(w);
        }
        m
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Weights {
    Unit,
    /// Integers 1..=4, so equal-weight ties are common and exact.
    SmallIntegers,
    /// Uniform reals in [0.1, 5).
    Reals,
}

/// Connected simple graph: random recursive tree plus `extra` random chords.
pub fn random_fixture(rng: &mut StdRng, n: usize, extra: usize, weights: Weights) -> Fixture {
    let draw = |rng: &mut StdRng| match weights {
        Weights::Unit => 1.0,
        Weights::SmallIntegers => rng.random_range(1..=4) as f64,
        Weights::Reals => rng.random_range(0.1..5.0),
    };
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        present[u][v] = true;
        present[v][u] = true;
        let w = draw(rng);
        edges.push((u, v, w));
    }
    let max_extra = n * (n - 1) / 2 - (n - 1);
    let mut added = 0;
    while added < extra.min(max_extra) {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b || present[a][b] {
            continue;
        }
        present[a][b] = true;
        present[b][a] = true;
        let w = draw(rng);
        edges.push((a.min(b), a.max(b), w));
        added += 1;
    }
    Fixture { n, edges }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub const TIE: f64 = 1e-12;

fn equal(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= TIE * a.abs().max(b.abs()))
}

/// All-pairs hop distances (Floyd-Warshall on unit weights).
pub fn hop_matrix(f: &Fixture) -> Vec<Vec<usize>> {
    let n = f.n;
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b, _) in &f.edges {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// All-pairs minimum weight and, among minimum-weight paths, minimum hops
/// (Floyd-Warshall on lexicographic (weight, hops) labels).
pub fn weighted_matrix(f: &Fixture) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let n = f.n;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    let mut h = vec![vec![usize::MAX / 4; n]; n];
    for i in 0..n {
        d[i][i] = 0.0;
        h[i][i] = 0;
    }
    for &(a, b, w) in &f.edges {
        d[a][b] = w;
        d[b][a] = w;
        h[a][b] = 1;
        h[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let nd = d[i][k] + d[k][j];
                let nh = h[i][k] + h[k][j];
                if equal(nd, d[i][j]) {
                    if nh < h[i][j] {
                        h[i][j] = nh;
                    }
                } else if nd < d[i][j] {
                    d[i][j] = nd;
                    h[i][j] = nh;
                }
            }
        }
    }
    (d, h)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub struct PathOracle {
    pub apl: f64,
    pub cpl: f64,
    pub wcpl: f64,
    pub hop_sum: u64,
    pub weighted_hop_sum: u64,
}

pub fn path_oracle(f: &Fixture) -> PathOracle {
    let n = f.n;
    let hops = hop_matrix(f);
    let (dist, whops) = weighted_matrix(f);
    let mut hop_sum = 0u64;
    let mut weighted_hop_sum = 0u64;
    let mut mean_h = Vec::new();
    let mut mean_w = Vec::new();
    for i in 0..n {
        let mut sh = 0;
        let mut sw = 0.0;
        for j in 0..n {
            if i != j {
                sh += hops[i][j];
                sw += dist[i][j];
                weighted_hop_sum += whops[i][j] as u64;
            }
        }
        hop_sum += sh as u64;
        mean_h.push(sh as f64 / (n - 1) as f64);
        mean_w.push(sw / (n - 1) as f64);
    }
    PathOracle {
        apl: hop_sum as f64 / (n * (n - 1)) as f64,
        cpl: median(mean_h),
        wcpl: median(mean_w),
        hop_sum,
        weighted_hop_sum,
    }
}

/// Every loopless path from `s` to `t` with its weight (depth-first).
pub fn all_simple_paths(f: &Fixture, s: usize, t: usize) -> Vec<(Vec<usize>, f64)> {
    let m = f.weight_matrix();
    let mut out = Vec::new();
    let mut stack = vec![s];
    let mut on = vec![false; f.n];
    on[s] = true;
    fn dfs(
        m: &[Vec<Option<f64>>],
        t: usize,
        stack: &mut Vec<usize>,
        on: &mut [bool],
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        let u = *stack.last().unwrap();
        if u == t {
            let w = stack.windows(2).map(|p| m[p[0]][p[1]].unwrap()).sum();
            out.push((stack.clone(), w));
            return;
        }
        for v in 0..m.len() {
            if m[u][v].is_some() && !on[v] {
                on[v] = true;
                stack.push(v);
                dfs(m, t, stack, on, out);
                stack.pop();
                on[v] = false;
            }
        }
    }
    dfs(&m, t, &mut stack, &mut on, &mut out);
    out
}

/// Betweenness by enumerating, for every unordered pair, all loopless paths
/// and keeping those of minimum length (hops or weight). Returns
/// (fractional share, raw path count through each vertex).
pub fn naive_betweenness(f: &Fixture, weighted: bool) -> (Vec<f64>, Vec<f64>) {
    let n = f.n;
    let mut share = vec![0.0; n];
    let mut raw = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = all_simple_paths(f, s, t);
            let len = |p: &(Vec<usize>, f64)| if weighted { p.1 } else { (p.0.len() - 1) as f64 };
            let best = paths.iter().map(len).fold(f64::INFINITY, f64::min);
            let shortest: Vec<_> = paths.iter().filter(|p| equal(len(p), best)).collect();
            let total = shortest.len() as f64;
            for p in &shortest {
                for &v in &p.0[1..p.0.len() - 1] {
                    share[v] += 1.0 / total;
                    raw[v] += 1.0;
                }
            }
        }
    }
    (share, raw)
}

/// Dominant eigenvector of the (weighted) adjacency matrix from a dense
/// symmetric eigendecomposition, sign-fixed and scaled to unit max norm.
pub fn dense_eigenvector(f: &Fixture, weighted: bool) -> Vec<f64> {
    let n = f.n;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v, w) in &f.edges {
        let x = if weighted { w } else { 1.0 };
        a[(u, v)] = x;
        a[(v, u)] = x;
    }
    let eig = SymmetricEigen::new(a);
    let mut best = 0;
    for i in 1..n {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let col = eig.eigenvectors.column(best);
    let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
    let max = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    col.iter().map(|x| sign * x / max).collect()
}

/// Connected components by union-find.
pub fn component_count(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut count = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

/// Adaptive degree-removal simulation on a dense adjacency matrix: before
/// each batch, degrees are recomputed on the survivors and the `batch`
/// highest (lowest index first on ties) are removed.
pub fn naive_degree_removal(f: &Fixture, batch: usize) -> Vec<f64> {
    let n = f.n;
    let m = f.weight_matrix();
    let mut alive = vec![true; n];
    let lcc = |alive: &[bool]| {
        let edges: Vec<(usize, usize)> = f
            .edges
            .iter()
            .filter(|e| alive[e.0] && alive[e.1])
            .map(|e| (e.0, e.1))
            .collect();
        let mut best = 0;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            // component of v by repeated relaxation
            let mut reach = vec![false; n];
            reach[v] = true;
            let mut changed = true;
            while changed {
                changed = false;
                for &(a, b) in &edges {
                    if reach[a] != reach[b] {
                        reach[a] = true;
                        reach[b] = true;
                        changed = true;
                    }
                }
            }
            best = best.max(reach.iter().filter(|r| **r).count());
        }
        best
    };
    let mut out = vec![lcc(&alive) as f64 / n as f64];
    let mut left = n;
    while left > 0 {
        let mut ranked: Vec<(i64, usize)> = (0..n)
            .filter(|&v| alive[v])
            .map(|v| (-((0..n).filter(|&w| alive[w] && m[v][w].is_some()).count() as i64), v))
            .collect();
        ranked.sort();
        for &(_, v) in ranked.iter().take(batch) {
            alive[v] = false;
            left -= 1;
        }
        out.push(lcc(&alive) as f64 / n as f64);
    }
    out
}
