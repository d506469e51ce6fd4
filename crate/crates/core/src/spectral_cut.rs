//! Laplacian spectral bisection and critical-edge detection.
//!
//! The unweighted Laplacian `L = D - A` of a connected graph has a simple
//! zero eigenvalue with constant eigenvector. The eigenvector of the second
//! smallest eigenvalue (the Fiedler vector) splits the nodes by sign; the
//! edges joining the two sides are the critical edges.
//!
//! Small graphs use a dense symmetric eigensolver. Larger ones run Lanczos on
//! the pseudo-inverse of `L` restricted to the complement of the constant
//! vector, with each application done by conjugate gradients.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};
use crate::grid_model::GridGraph;

/// Above this order the iterative solver is used.
pub const DENSE_LIMIT: usize = 512;
/// Infinity-norm bound on `L v - lambda v` accepted from the iterative solver.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Fiedler components below this magnitude count as zero.
pub const ZERO_COMPONENT: f64 = 1e-12;

/// L = D - A over the simple graph (parallel cables collapsed).
pub fn laplacian(g: &GridGraph) -> DMatrix<f64> {
    let n = g.order();
    let mut l = DMatrix::zeros(n, n);
    for v in 0..n {
        l[(v, v)] = g.degree(v) as f64;
        for &(u, _) in g.neighbors(v) {
            l[(v, u)] = -1.0;
        }
    }
    l
}

fn laplacian_apply(g: &GridGraph, x: &[f64], out: &mut [f64]) {
    for (v, o) in out.iter_mut().enumerate() {
        let nbrs = g.neighbors(v);
        *o = nbrs.len() as f64 * x[v] - nbrs.iter().map(|&(u, _)| x[u]).sum::<f64>();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiedlerSolver {
    /// Dense up to [`DENSE_LIMIT`] nodes, iterative above.
    #[default]
    Auto,
    Dense,
    Iterative,
}

/// Second-smallest Laplacian eigenpair of a connected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FiedlerPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

pub fn fiedler_pair(g: &GridGraph, solver: FiedlerSolver) -> Result<FiedlerPair> {
    g.require_connected(2)?;
    let dense = match solver {
        FiedlerSolver::Auto => g.order() <= DENSE_LIMIT,
        FiedlerSolver::Dense => true,
        FiedlerSolver::Iterative => false,
    };
    let mut pair = if dense {
        dense_fiedler(g)?
    } else {
        lanczos_fiedler(g)?
    };
    normalize_sign(&mut pair.vector);
    Ok(pair)
}

fn dense_fiedler(g: &GridGraph) -> Result<FiedlerPair> {
    let eig = SymmetricEigen::new(laplacian(g));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = order[1];
    Ok(FiedlerPair {
        value: eig.eigenvalues[k],
        vector: eig.eigenvectors.column(k).iter().copied().collect(),
    })
}

fn normalize_sign(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > ZERO_COMPONENT) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Solves `L x = b` for `b` orthogonal to the constant vector.
fn cg_solve(g: &GridGraph, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut lp = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    let mut rr = dot(&r, &r);
    for _ in 0..(20 * n).max(100) {
        if rr.sqrt() <= 1e-14 * b_norm {
            break;
        }
        laplacian_apply(g, &p, &mut lp);
        let alpha = rr / dot(&p, &lp);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * lp[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    remove_mean(&mut x);
    x
}

fn lanczos_fiedler(g: &GridGraph) -> Result<FiedlerPair> {
    const MAX_STEPS: usize = 300;
    let n = g.order();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f1ed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    remove_mean(&mut q);
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|v| *v /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last_residual = f64::INFINITY;
    let mut lv = vec![0.0; n];
    let steps = MAX_STEPS.min(n - 1);
    for j in 0..steps {
        let mut w = cg_solve(g, &basis[j]);
        let a = dot(&basis[j], &w);
        alphas.push(a);
        // full reorthogonalisation, twice
        for _ in 0..2 {
            for qk in &basis {
                let c = dot(qk, &w);
                w.iter_mut().zip(qk).for_each(|(wi, qi)| *wi -= c * qi);
            }
            remove_mean(&mut w);
        }
        let b = dot(&w, &w).sqrt();
        let m = alphas.len();
        let check = m % 5 == 0 || m == steps || b < 1e-12;
        if check {
            let (theta, y) = top_ritz(&alphas, &betas);
            let mut v = vec![0.0; n];
            for (yk, qk) in y.iter().zip(&basis) {
                v.iter_mut().zip(qk).for_each(|(vi, qi)| *vi += yk * qi);
            }
            let vn = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= vn);
            laplacian_apply(g, &v, &mut lv);
            let lambda = dot(&v, &lv);
            last_residual = lv
                .iter()
                .zip(&v)
                .map(|(l, x)| (l - lambda * x).abs())
                .fold(0.0, f64::max);
            if last_residual < RESIDUAL_TOLERANCE {
                debug_assert!(theta > 0.0);
                return Ok(FiedlerPair { value: lambda, vector: v });
            }
        }
        if b < 1e-12 {
            break;
        }
        betas.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    Err(GridError::Eigensolver(format!(
        "Lanczos did not reach residual {RESIDUAL_TOLERANCE:e} (last {last_residual:e})"
    )))
}

/// Largest eigenpair of the tridiagonal matrix with the given diagonals.
fn top_ritz(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let k = eig.eigenvalues.imax();
    let y: DVector<f64> = eig.eigenvectors.column(k).into_owned();
    (eig.eigenvalues[k], y.iter().copied().collect())
}

/// Sign split of a connected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bisection {
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
    /// Crossing cables as node-index pairs, parallel cables listed separately.
    pub critical_edges: Vec<(usize, usize)>,
    pub fiedler_value: f64,
}

impl Bisection {
    pub fn critical_edge_count(&self) -> usize {
        self.critical_edges.len()
    }
}

pub fn fiedler_bisect(g: &GridGraph) -> Result<Bisection> {
    fiedler_bisect_with(g, FiedlerSolver::Auto)
}

pub fn fiedler_bisect_with(g: &GridGraph, solver: FiedlerSolver) -> Result<Bisection> {
    let pair = fiedler_pair(g, solver)?;
    Ok(split_by_sign(g, &pair.vector, pair.value))
}

/// Positive components go to side A, negative to side B; near-zero components
/// join whichever side is currently smaller (side A on ties).
pub fn split_by_sign(g: &GridGraph, vector: &[f64], fiedler_value: f64) -> Bisection {
    let mut side = vec![0u8; vector.len()];
    let (mut na, mut nb) = (0usize, 0usize);
    let mut zeros = Vec::new();
    for (v, &x) in vector.iter().enumerate() {
        if x > ZERO_COMPONENT {
            side[v] = 1;
            na += 1;
        } else if x < -ZERO_COMPONENT {
            side[v] = 2;
            nb += 1;
        } else {
            zeros.push(v);
        }
    }
    for v in zeros {
        if na <= nb {
            side[v] = 1;
            na += 1;
        } else {
            side[v] = 2;
            nb += 1;
        }
    }
    let side_a = (0..side.len()).filter(|&v| side[v] == 1).collect();
    let side_b = (0..side.len()).filter(|&v| side[v] == 2).collect();
    let critical_edges = g
        .edges()
        .iter()
        .filter(|e| side[e.a] != side[e.b])
        .map(|e| (e.a.min(e.b), e.a.max(e.b)))
        .collect();
    Bisection {
        side_a,
        side_b,
        critical_edges,
        fiedler_value,
    }
}

/// Recursive bisection; node indices everywhere refer to the root graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionTree {
    pub bisection: Bisection,
    /// Set when this level split only the largest connected piece of a side
    /// that was internally disconnected.
    pub largest_component_only: bool,
    pub side_a_child: Option<Box<BisectionTree>>,
    pub side_b_child: Option<Box<BisectionTree>>,
}

impl BisectionTree {
    /// Critical-edge counts level by level (root first).
    pub fn counts_by_level(&self) -> Vec<Vec<usize>> {
        let mut levels: Vec<Vec<usize>> = Vec::new();
        let mut frontier = vec![self];
        while !frontier.is_empty() {
            levels.push(frontier.iter().map(|t| t.bisection.critical_edge_count()).collect());
            frontier = frontier
                .iter()
                .flat_map(|t| [t.side_a_child.as_deref(), t.side_b_child.as_deref()])
                .flatten()
                .collect();
        }
        levels
    }
}

pub fn recursive_bisect(g: &GridGraph, depth: usize) -> Result<BisectionTree> {
    if depth == 0 {
        return Err(GridError::InvalidArgument("bisection depth must be at least 1".into()));
    }
    let identity: Vec<usize> = (0..g.order()).collect();
    bisect_level(g, &identity, depth, false)
}

fn bisect_level(g: &GridGraph, to_root: &[usize], depth: usize, largest_only: bool) -> Result<BisectionTree> {
    let local = fiedler_bisect(g)?;
    let mut tree = BisectionTree {
        bisection: Bisection {
            side_a: local.side_a.iter().map(|&v| to_root[v]).collect(),
            side_b: local.side_b.iter().map(|&v| to_root[v]).collect(),
            critical_edges: local
                .critical_edges
                .iter()
                .map(|&(a, b)| (to_root[a], to_root[b]))
                .collect(),
            fiedler_value: local.fiedler_value,
        },
        largest_component_only: largest_only,
        side_a_child: None,
        side_b_child: None,
    };
    if depth > 1 {
        tree.side_a_child = descend(g, &local.side_a, to_root, depth - 1)?;
        tree.side_b_child = descend(g, &local.side_b, to_root, depth - 1)?;
    }
    Ok(tree)
}

fn descend(g: &GridGraph, side: &[usize], to_root: &[usize], depth: usize) -> Result<Option<Box<BisectionTree>>> {
    if side.len() < 2 {
        return Ok(None);
    }
    let sub = g.induced_subgraph(side);
    let pieces = crate::grid_model::connected_components(&sub.graph);
    let disconnected = pieces.len() > 1;
    let piece = &pieces[0];
    if piece.graph.order() < 2 {
        return Ok(None);
    }
    let map: Vec<usize> = piece.original.iter().map(|&i| to_root[sub.original[i]]).collect();
    Ok(Some(Box::new(bisect_level(&piece.graph, &map, depth, disconnected)?)))
}
