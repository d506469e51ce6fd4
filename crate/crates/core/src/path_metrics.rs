//! Path-length and clustering metrics of a connected grid component.
//!
//! All pairwise quantities come from one pass of per-source searches (BFS for
//! hop counts, Dijkstra for resistance-weighted paths). Per-source results are
//! collected in source order before any reduction, so the output does not
//! depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};
use crate::grid_model::GridGraph;
use crate::shortest::{bfs_hops, dijkstra_with_hops};

#[derive(Debug, Clone, PartialEq)]
struct SourceSums {
    hops: u64,
    weighted: f64,
    weighted_path_hops: u64,
}

/// Pairwise path statistics of a connected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    pub order: usize,
    /// Sum over ordered pairs of unweighted hop distance.
    pub hop_sum: u64,
    /// Sum over ordered pairs of hops along the chosen minimum-weight path.
    pub weighted_path_hop_sum: u64,
    /// Mean hop distance from each vertex to all others.
    pub mean_hops: Vec<f64>,
    /// Mean weighted distance from each vertex to all others.
    pub mean_weighted: Vec<f64>,
}

impl PathSummary {
    pub fn compute(g: &GridGraph) -> Result<Self> {
        g.require_connected(2)?;
        let n = g.order();
        let per_source: Vec<SourceSums> = (0..n)
            .into_par_iter()
            .map(|s| {
                let hops = bfs_hops(g, s);
                let (dist, whops) = dijkstra_with_hops(g, s);
                let mut acc = SourceSums {
                    hops: 0,
                    weighted: 0.0,
                    weighted_path_hops: 0,
                };
                for t in 0..n {
                    if t == s {
                        continue;
                    }
                    acc.hops += hops[t] as u64;
                    acc.weighted += dist[t];
                    acc.weighted_path_hops += whops[t] as u64;
                }
                acc
            })
            .collect();
        let denom = (n - 1) as f64;
        Ok(PathSummary {
            order: n,
            hop_sum: per_source.iter().map(|s| s.hops).sum(),
            weighted_path_hop_sum: per_source.iter().map(|s| s.weighted_path_hops).sum(),
            mean_hops: per_source.iter().map(|s| s.hops as f64 / denom).collect(),
            mean_weighted: per_source.iter().map(|s| s.weighted / denom).collect(),
        })
    }

    fn pairs(&self) -> f64 {
        (self.order * (self.order - 1)) as f64
    }

    pub fn apl(&self) -> f64 {
        self.hop_sum as f64 / self.pairs()
    }

    pub fn cpl(&self) -> f64 {
        median(&self.mean_hops)
    }

    pub fn wcpl(&self) -> f64 {
        median(&self.mean_weighted)
    }

    pub fn traversed_increase_pct(&self) -> f64 {
        100.0 * (self.weighted_path_hop_sum as f64 - self.hop_sum as f64) / self.hop_sum as f64
    }

    /// Mean number of interior nodes on the minimum-weight path between two
    /// distinct nodes.
    pub fn mean_weighted_interior(&self) -> f64 {
        self.weighted_path_hop_sum as f64 / self.pairs() - 1.0
    }
}

/// Median; even-length inputs average the two central values.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Mean hop distance over all ordered pairs of distinct nodes.
pub fn average_path_length(g: &GridGraph) -> Result<f64> {
    g.require_connected(2)?;
    let n = g.order();
    let total: u64 = (0..n)
        .into_par_iter()
        .map(|s| bfs_hops(g, s).iter().map(|&d| d as u64).sum::<u64>())
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total as f64 / (n * (n - 1)) as f64)
}

/// Median over vertices of the mean hop distance to all other vertices.
pub fn characteristic_path_length(g: &GridGraph) -> Result<f64> {
    g.require_connected(2)?;
    let n = g.order();
    let means: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|s| bfs_hops(g, s).iter().map(|&d| d as u64).sum::<u64>() as f64 / (n - 1) as f64)
        .collect();
    Ok(median(&means))
}

/// Median over vertices of the mean minimum-resistance distance to all others.
pub fn weighted_cpl(g: &GridGraph) -> Result<f64> {
    g.require_connected(2)?;
    let n = g.order();
    let means: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|s| {
            let (dist, _) = dijkstra_with_hops(g, s);
            dist.iter().sum::<f64>() / (n - 1) as f64
        })
        .collect();
    Ok(median(&means))
}

pub fn normalized_wcpl(wcpl: f64, edge_avg_weight: f64) -> Result<f64> {
    if !(edge_avg_weight > 0.0) {
        return Err(GridError::InvalidArgument(format!(
            "average edge weight must be positive, got {edge_avg_weight}"
        )));
    }
    Ok(wcpl / edge_avg_weight)
}

/// Per-vertex clustering: edges among neighbours over C(k, 2); 0 when k < 2.
pub fn local_clustering(g: &GridGraph) -> Vec<f64> {
    let n = g.order();
    let mut mark = vec![usize::MAX; n];
    (0..n)
        .map(|v| {
            let nbrs = g.neighbors(v);
            let k = nbrs.len();
            if k < 2 {
                return 0.0;
            }
            for &(u, _) in nbrs {
                mark[u] = v;
            }
            let mut links = 0usize;
            for &(u, _) in nbrs {
                links += g.neighbors(u).iter().filter(|&&(w, _)| w > u && mark[w] == v).count();
            }
            links as f64 / (k * (k - 1) / 2) as f64
        })
        .collect()
}

pub fn clustering_coefficient(g: &GridGraph) -> Result<f64> {
    if g.is_empty() {
        return Err(GridError::EmptyGraph);
    }
    let local = local_clustering(g);
    Ok(local.iter().sum::<f64>() / local.len() as f64)
}

/// Sum of incident edge weights (parallel cables collapsed to their minimum).
pub fn weighted_degree(g: &GridGraph, v: usize) -> Result<f64> {
    if v >= g.order() {
        return Err(GridError::UnknownVertex(v));
    }
    Ok(g.neighbors(v).iter().map(|&(_, w)| w).sum())
}

pub fn weighted_degrees(g: &GridGraph) -> Vec<f64> {
    (0..g.order())
        .map(|v| g.neighbors(v).iter().map(|&(_, w)| w).sum())
        .collect()
}

/// Percentage increase in hops of minimum-weight paths over hop-shortest
/// paths, averaged over all pairs.
pub fn traversed_nodes_increase(g: &GridGraph) -> Result<f64> {
    Ok(PathSummary::compute(g)?.traversed_increase_pct())
}

/// Table row for one connected component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub component_id: usize,
    pub order: usize,
    pub size: usize,
    pub avg_degree: f64,
    pub apl: f64,
    pub cpl: f64,
    pub cc: f64,
    pub wcpl: f64,
    pub edge_avg_weight: f64,
    pub nwcpl: f64,
    pub avg_traversed_increase_pct: f64,
}

impl MetricsReport {
    /// Computes every column for a connected component. Single-node
    /// components report zero for all path quantities.
    pub fn compute(component_id: usize, g: &GridGraph) -> Result<Self> {
        if g.is_empty() {
            return Err(GridError::EmptyGraph);
        }
        let edge_avg_weight = g.edge_mean_weight();
        let mut report = MetricsReport {
            component_id,
            order: g.order(),
            size: g.size(),
            avg_degree: crate::grid_model::avg_degree(g.order(), g.size()),
            apl: 0.0,
            cpl: 0.0,
            cc: clustering_coefficient(g)?,
            wcpl: 0.0,
            edge_avg_weight,
            nwcpl: 0.0,
            avg_traversed_increase_pct: 0.0,
        };
        if g.order() >= 2 {
            let summary = PathSummary::compute(g)?;
            report.apl = summary.apl();
            report.cpl = summary.cpl();
            report.wcpl = summary.wcpl();
            report.nwcpl = normalized_wcpl(report.wcpl, edge_avg_weight)?;
            report.avg_traversed_increase_pct = summary.traversed_increase_pct();
        }
        Ok(report)
    }
}
