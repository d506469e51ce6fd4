//! Dissipation (alpha) and reliability (beta) parameters derived from
//! topology, and the quadratic price surface over them.
//!
//! ```text
//! alpha = L_line + L_substation
//! beta  = Red / (Rob * ln Cap)
//! ```

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::seeded_rng;
use crate::error::{GridError, Result};
use crate::grid_model::GridGraph;
use crate::ksp::{PathFinder, SearchScratch};
use crate::path_metrics::PathSummary;
use crate::resilience::{compare_policies, robustness_at, PolicyKind, RemovalPolicy};
use crate::shortest::dijkstra;

pub const ROBUSTNESS_FRACTION: f64 = 0.2;
pub const ROBUSTNESS_STEP: f64 = 0.05;
pub const ROBUSTNESS_TRIALS: usize = 10;
pub const REDUNDANCY_SAMPLE: f64 = 0.4;
pub const REDUNDANCY_PATHS: usize = 10;

/// Normalised weighted characteristic path length.
pub fn line_losses(g: &GridGraph) -> Result<f64> {
    line_losses_from(&PathSummary::compute(g)?, g)
}

fn line_losses_from(summary: &PathSummary, g: &GridGraph) -> Result<f64> {
    crate::path_metrics::normalized_wcpl(summary.wcpl(), g.edge_mean_weight())
}

/// Mean number of interior nodes on minimum-weight paths.
pub fn substation_losses(g: &GridGraph) -> Result<f64> {
    Ok(PathSummary::compute(g)?.mean_weighted_interior())
}

/// Mean of the relative largest component after 20% of the nodes are
/// removed at random (10 trials) and by weighted degree.
pub fn robustness(g: &GridGraph, seed: u64) -> Result<f64> {
    g.require_connected(1)?;
    let traces = compare_policies(
        g,
        &[
            RemovalPolicy::random(seed),
            RemovalPolicy::targeted(PolicyKind::WeightedDegree)?,
        ],
        ROBUSTNESS_STEP,
        ROBUSTNESS_TRIALS,
    )?;
    Ok(0.5 * (robustness_at(&traces[0], ROBUSTNESS_FRACTION) + robustness_at(&traces[1], ROBUSTNESS_FRACTION)))
}

/// How pairs with fewer than K loopless paths are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPaths {
    /// Repeat the heaviest path found until K entries are filled.
    #[default]
    WorstCase,
    /// Sum only the paths that exist.
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedundancyOptions {
    pub k: usize,
    pub sample_fraction: f64,
    pub missing: MissingPaths,
}

impl Default for RedundancyOptions {
    fn default() -> Self {
        RedundancyOptions {
            k: REDUNDANCY_PATHS,
            sample_fraction: REDUNDANCY_SAMPLE,
            missing: MissingPaths::WorstCase,
        }
    }
}

/// Seeded node sample split into (sources, sinks); an odd extra node goes
/// to the sources.
pub fn redundancy_sample(order: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let m = ((fraction * order as f64 + 1e-9).floor() as usize).min(order);
    let picked = sample(&mut seeded_rng(seed), order, m).into_vec();
    let sources = m.div_ceil(2);
    (picked[..sources].to_vec(), picked[sources..].to_vec())
}

/// Sum over sampled (source, sink) pairs of the K shortest loopless path
/// weights, divided by the weighted characteristic path length.
pub fn redundancy(g: &GridGraph, seed: u64) -> Result<f64> {
    redundancy_with(g, seed, RedundancyOptions::default())
}

pub fn redundancy_with(g: &GridGraph, seed: u64, opts: RedundancyOptions) -> Result<f64> {
    let wcpl = PathSummary::compute(g)?.wcpl();
    redundancy_from(g, seed, opts, wcpl)
}

fn redundancy_from(g: &GridGraph, seed: u64, opts: RedundancyOptions, wcpl: f64) -> Result<f64> {
    g.require_connected(5)?;
    if opts.k == 0 {
        return Err(GridError::InvalidArgument("K must be at least 1".into()));
    }
    let (sources, sinks) = redundancy_sample(g.order(), opts.sample_fraction, seed);
    if sources.is_empty() || sinks.is_empty() {
        return Err(GridError::InsufficientData(format!(
            "sample of {} nodes has no source/sink pair",
            sources.len() + sinks.len()
        )));
    }
    let finder = PathFinder::new(g);
    let per_sink: Vec<f64> = sinks
        .par_iter()
        .map_init(
            || SearchScratch::new(g.order()),
            |scratch, &t| {
                let to_target = dijkstra(g, t);
                sources
                    .iter()
                    .map(|&s| {
                        let paths = finder.k_shortest(s, t, opts.k, &to_target, scratch);
                        let mut sum: f64 = paths.iter().map(|p| p.weight).sum();
                        if opts.missing == MissingPaths::WorstCase {
                            let worst = paths.iter().map(|p| p.weight).fold(0.0, f64::max);
                            sum += worst * (opts.k - paths.len()) as f64;
                        }
                        sum
                    })
                    .sum()
            },
        )
        .collect();
    Ok(per_sink.iter().sum::<f64>() / wcpl)
}

/// Weighted characteristic path length on maximum-current weights over the
/// mean current.
pub fn capacity(g: &GridGraph) -> Result<f64> {
    let current = current_graph(g)?;
    line_losses(&current)
}

fn current_graph(g: &GridGraph) -> Result<GridGraph> {
    g.reweighted(|e| e.max_current).map_err(|missing| {
        GridError::MissingCurrent(
            missing
                .into_iter()
                .map(|i| {
                    let e = &g.edges()[i];
                    (g.node(e.a).id.clone(), g.node(e.b).id.clone())
                })
                .collect(),
        )
    })
}

pub fn alpha(g: &GridGraph) -> Result<f64> {
    let summary = PathSummary::compute(g)?;
    Ok(line_losses_from(&summary, g)? + summary.mean_weighted_interior())
}

pub fn beta(g: &GridGraph, seed: u64) -> Result<f64> {
    let red = redundancy(g, seed)?;
    let rob = robustness(g, seed)?;
    let cap = capacity(g)?;
    beta_from(red, rob, cap)
}

/// Capacities this close to 1 are rounding noise around ln(1) = 0.
pub const CAPACITY_FLOOR: f64 = 1.0 + 1e-9;

fn beta_from(red: f64, rob: f64, cap: f64) -> Result<f64> {
    if !(cap > CAPACITY_FLOOR) {
        return Err(GridError::CapacityTooLow(cap));
    }
    if !(rob > 0.0) {
        return Err(GridError::ZeroRobustness);
    }
    Ok(red / (rob * cap.ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub l_line: f64,
    pub l_substation: f64,
    pub rob: f64,
    pub red: f64,
    pub cap: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl CostParams {
    /// Combines the five constituents; fails when `cap <= 1` or `rob == 0`.
    pub fn from_parts(l_line: f64, l_substation: f64, rob: f64, red: f64, cap: f64) -> Result<Self> {
        Ok(CostParams {
            l_line,
            l_substation,
            rob,
            red,
            cap,
            alpha: l_line + l_substation,
            beta: beta_from(red, rob, cap)?,
        })
    }

    /// All constituents for one connected network, sharing the all-pairs pass.
    pub fn compute(g: &GridGraph, seed: u64) -> Result<Self> {
        let summary = PathSummary::compute(g)?;
        let cap = capacity(g)?;
        let l_line = line_losses_from(&summary, g)?;
        let l_substation = summary.mean_weighted_interior();
        let rob = robustness(g, seed)?;
        let red = redundancy_from(g, seed, RedundancyOptions::default(), summary.wcpl())?;
        Self::from_parts(l_line, l_substation, rob, red, cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceConfig {
    pub base: f64,
    pub alpha_ref: f64,
    pub beta_ref: f64,
}

impl PriceConfig {
    pub fn new(base: f64, alpha_ref: f64, beta_ref: f64) -> Result<Self> {
        if !(alpha_ref > 0.0 && beta_ref > 0.0) {
            return Err(GridError::InvalidArgument(format!(
                "reference scales must be positive (alpha_ref={alpha_ref}, beta_ref={beta_ref})"
            )));
        }
        Ok(PriceConfig {
            base,
            alpha_ref,
            beta_ref,
        })
    }

    pub fn price(&self, alpha: f64, beta: f64) -> f64 {
        self.base * (1.0 + (alpha / self.alpha_ref).powi(2) + (beta / self.beta_ref).powi(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub alpha: f64,
    pub beta: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub network_id: String,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSurface {
    pub config: PriceConfig,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Row-major over `alphas`, then `betas`.
    pub points: Vec<PricePoint>,
    pub markers: Vec<Marker>,
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn price_surface(alphas: &[f64], betas: &[f64], config: PriceConfig, markers: Vec<Marker>) -> Result<PriceSurface> {
    if alphas.is_empty() || betas.is_empty() {
        return Err(GridError::InvalidArgument("price surface ranges must be nonempty".into()));
    }
    let config = PriceConfig::new(config.base, config.alpha_ref, config.beta_ref)?;
    let points = alphas
        .iter()
        .flat_map(|&a| {
            betas.iter().map(move |&b| PricePoint {
                alpha: a,
                beta: b,
                price: config.price(a, b),
            })
        })
        .collect();
    Ok(PriceSurface {
        config,
        alphas: alphas.to_vec(),
        betas: betas.to_vec(),
        points,
        markers,
    })
}

impl PriceSurface {
    pub fn surface_csv(&self) -> std::result::Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["alpha", "beta", "price"])?;
        for p in &self.points {
            w.write_record([p.alpha.to_string(), p.beta.to_string(), p.price.to_string()])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
    }

    pub fn markers_csv(&self) -> std::result::Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["network_id", "alpha", "beta"])?;
        for m in &self.markers {
            w.write_record([m.network_id.clone(), m.alpha.to_string(), m.beta.to_string()])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
    }
}
