//! Connected random graphs matched in order and size, and the small-world test.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};
use crate::grid_model::{GridEdge, GridGraph, NodeKind, NodeRecord};
use crate::path_metrics::{clustering_coefficient, PathSummary};

/// Deterministic RNG for a 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn check_feasible(order: usize, size: usize) -> Result<()> {
    if order == 0 {
        return Err(GridError::Infeasible("order must be positive".into()));
    }
    let max = order * (order - 1) / 2;
    if size + 1 < order {
        return Err(GridError::Infeasible(format!(
            "{size} edges cannot connect {order} nodes (need at least {})",
            order - 1
        )));
    }
    if size > max {
        return Err(GridError::Infeasible(format!(
            "{size} edges exceed the {max} possible pairs among {order} nodes"
        )));
    }
    Ok(())
}

/// Uniform draws of G(N, M) tried before falling back to the spanning-tree
/// construction.
const REJECTION_ATTEMPTS: usize = 64;

/// Edge list of a connected simple graph with `order` nodes and `size`
/// edges.
///
/// When a uniform G(N, M) draw is likely to be connected (expected number of
/// isolated nodes N e^(-2M/N) at most 3), draws are rejected until one is,
/// which samples uniformly among connected graphs. Sparser requests use a
/// uniform random labelled spanning tree (random Pruefer sequence) plus
/// `size - (order - 1)` distinct pairs drawn uniformly from the rest.
pub fn connected_edge_list<R: Rng>(order: usize, size: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    check_feasible(order, size)?;
    let isolated = order as f64 * (-2.0 * size as f64 / order as f64).exp();
    if order > 2 && isolated <= 3.0 {
        for _ in 0..REJECTION_ATTEMPTS {
            let edges = add_uniform_pairs(order, Vec::new(), size, rng);
            if is_spanning_connected(order, &edges) {
                return Ok(edges);
            }
        }
    }
    let tree = random_tree(order, rng);
    let extra = size - tree.len();
    Ok(add_uniform_pairs(order, tree, extra, rng))
}

/// Appends `extra` distinct pairs chosen uniformly among those not in `edges`.
fn add_uniform_pairs<R: Rng>(order: usize, mut edges: Vec<(usize, usize)>, extra: usize, rng: &mut R) -> Vec<(usize, usize)> {
    if extra == 0 {
        return edges;
    }
    let mut present: HashSet<(usize, usize)> = edges.iter().copied().collect();
    let total = order * (order - 1) / 2;
    let free = total - edges.len();
    if free <= 4 * extra || free <= 200_000 {
        let mut candidates = Vec::with_capacity(free);
        for a in 0..order {
            for b in a + 1..order {
                if !present.contains(&(a, b)) {
                    candidates.push((a, b));
                }
            }
        }
        for i in sample(rng, candidates.len(), extra) {
            edges.push(candidates[i]);
        }
    } else {
        let target = edges.len() + extra;
        while edges.len() < target {
            let a = rng.random_range(0..order);
            let b = rng.random_range(0..order);
            if a == b {
                continue;
            }
            let pair = (a.min(b), a.max(b));
            if present.insert(pair) {
                edges.push(pair);
            }
        }
    }
    edges
}

fn is_spanning_connected(order: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..order).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut parts = order;
    for &(a, b) in edges {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            parts -= 1;
        }
    }
    parts == 1
}

fn random_tree<R: Rng>(order: usize, rng: &mut R) -> Vec<(usize, usize)> {
    match order {
        0 | 1 => return Vec::new(),
        2 => return vec![(0, 1)],
        _ => {}
    }
    let prufer: Vec<usize> = (0..order - 2).map(|_| rng.random_range(0..order)).collect();
    let mut degree = vec![1usize; order];
    for &v in &prufer {
        degree[v] += 1;
    }
    let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        (0..order).filter(|&v| degree[v] == 1).map(std::cmp::Reverse).collect();
    let mut edges = Vec::with_capacity(order - 1);
    for &v in &prufer {
        let std::cmp::Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf.min(v), leaf.max(v)));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.push(std::cmp::Reverse(v));
        }
    }
    let std::cmp::Reverse(u) = leaves.pop().expect("two leaves remain");
    let std::cmp::Reverse(w) = leaves.pop().expect("two leaves remain");
    edges.push((u.min(w), u.max(w)));
    edges
}

pub(crate) fn numbered_nodes(order: usize) -> Vec<NodeRecord> {
    (0..order)
        .map(|i| NodeRecord::new(format!("n{i}"), NodeKind::Substation))
        .collect()
}

/// Connected random graph with exactly `order` nodes and `size` unit-weight edges.
pub fn random_connected_graph(order: usize, size: usize, seed: u64) -> Result<GridGraph> {
    let mut rng = seeded_rng(seed);
    let pairs = connected_edge_list(order, size, &mut rng)?;
    let edges = pairs
        .into_iter()
        .map(|(a, b)| GridEdge {
            a,
            b,
            weight: 1.0,
            max_current: None,
            is_link: false,
        })
        .collect();
    GridGraph::from_parts(numbered_nodes(order), edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineMetrics {
    pub trials: usize,
    pub apl: f64,
    pub cpl: f64,
    pub cc: f64,
    pub apl_sd: f64,
    pub cpl_sd: f64,
    pub cc_sd: f64,
}

/// Mean APL, CPL and clustering over `trials` random graphs; trial `i` uses
/// seed `seed + i`.
pub fn baseline_metrics(order: usize, size: usize, seed: u64, trials: usize) -> Result<BaselineMetrics> {
    if trials == 0 {
        return Err(GridError::InvalidArgument("trials must be at least 1".into()));
    }
    check_feasible(order, size)?;
    if order < 2 {
        return Err(GridError::TooSmall { order, required: 2 });
    }
    let samples: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = random_connected_graph(order, size, seed.wrapping_add(t as u64))?;
            let s = PathSummary::compute(&g)?;
            Ok((s.apl(), s.cpl(), clustering_coefficient(&g)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = |f: fn(&(f64, f64, f64)) -> f64| {
        let n = samples.len() as f64;
        let mean = samples.iter().map(f).sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (f(s) - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (mean, var.sqrt())
    };
    let (apl, apl_sd) = stats(|s| s.0);
    let (cpl, cpl_sd) = stats(|s| s.1);
    let (cc, cc_sd) = stats(|s| s.2);
    Ok(BaselineMetrics {
        trials,
        apl,
        cpl,
        cc,
        apl_sd,
        cpl_sd,
        cc_sd,
    })
}

/// Measured quantities of the sample network fed to the small-world test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub order: usize,
    pub avg_degree: f64,
    pub cpl: f64,
    pub cc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallWorldVerdict {
    pub cpl_ratio: f64,
    /// `None` when the random baseline has zero clustering.
    pub cc_ratio: Option<f64>,
    pub ws_condition_holds: bool,
    pub is_small_world: bool,
}

pub const DEFAULT_CPL_TOLERANCE: f64 = 2.0;
pub const DEFAULT_CC_DOMINANCE: f64 = 4.0;

/// Small world: path length comparable to the random baseline (ratio at most
/// `cpl_tolerance`) with clustering at least `cc_dominance` times higher.
///
/// The sparse-regime condition N >> <k> >> ln N >> 1 is read as
/// N > 10 <k>, <k> > 2 ln N and ln N > 1.
pub fn small_world_test(
    sample: &SampleMetrics,
    baseline_cpl: f64,
    baseline_cc: f64,
    cpl_tolerance: f64,
    cc_dominance: f64,
) -> Result<SmallWorldVerdict> {
    if !(baseline_cpl > 0.0) {
        return Err(GridError::InvalidArgument(format!(
            "baseline CPL must be positive, got {baseline_cpl}"
        )));
    }
    let cpl_ratio = sample.cpl / baseline_cpl;
    let cc_ratio = (baseline_cc > 0.0).then(|| sample.cc / baseline_cc);
    let n = sample.order as f64;
    let ln_n = n.ln();
    let k = sample.avg_degree;
    let ws_condition_holds = n > 10.0 * k && k > 2.0 * ln_n && ln_n > 1.0;
    let is_small_world = match cc_ratio {
        Some(r) => cpl_ratio <= cpl_tolerance && r >= cc_dominance,
        None => false,
    };
    Ok(SmallWorldVerdict {
        cpl_ratio,
        cc_ratio,
        ws_condition_holds,
        is_small_world,
    })
}
