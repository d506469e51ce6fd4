//! The `analyze` pipeline: parse, split into components, run every section.

use std::path::Path;

use gridnet_core::baselines::{baseline_metrics, small_world_test, SampleMetrics, DEFAULT_CC_DOMINANCE, DEFAULT_CPL_TOLERANCE};
use gridnet_core::centrality::{betweenness, eigenvector_centrality, CentralityRanking};
use gridnet_core::cost_model::{linspace, price_surface, CostParams, Marker, PriceConfig};
use gridnet_core::distributions_fit::{betweenness_ccdf, classify, degree_ccdf, EmpiricalCcdf};
use gridnet_core::ingest::{load_grid, ParseError};
use gridnet_core::path_metrics::MetricsReport;
use gridnet_core::resilience::{compare_policies, PolicyKind, RemovalPolicy};
use gridnet_core::spectral_cut::recursive_bisect;
use gridnet_core::{connected_components, GridError, GridGraph};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bundle::*;

pub const FORMAT_VERSION: u32 = 1;
pub const TOP_K: usize = 10;
pub const REMOVAL_TRIALS: usize = 10;
pub const BISECTION_DEPTH: usize = 2;
pub const SURFACE_POINTS: usize = 41;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub seed: u64,
    pub cost: bool,
    pub baseline_trials: usize,
    pub removal_step: f64,
    pub resilience: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            seed: 0,
            cost: false,
            baseline_trials: 10,
            removal_step: 0.05,
            resilience: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid grid: {0}")]
    Invalid(GridError),
    #[error("invalid option: {0}")]
    Usage(String),
    #[error("numeric failure in {section}: {cause}")]
    Numeric { section: String, cause: GridError },
}

impl AnalyzeError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AnalyzeError::Parse(_) | AnalyzeError::Invalid(_) | AnalyzeError::Usage(_) => 2,
            AnalyzeError::Numeric { .. } => 3,
        }
    }
}

/// Errors that mean a computation broke rather than that its inputs were
/// unsuitable.
fn is_numeric_failure(e: &GridError) -> bool {
    matches!(e, GridError::NotConverged { .. } | GridError::Eigensolver(_))
}

/// Turns a section result into a `Section`: unsuitable input becomes a
/// skip, solver breakdowns abort the run.
fn section<T>(
    name: &str,
    component: Option<usize>,
    digest: &str,
    result: Result<T, GridError>,
) -> Result<Section<T>, AnalyzeError> {
    match result {
        Ok(v) => Ok(Section::ok(component, digest, v)),
        Err(e) if is_numeric_failure(&e) => Err(AnalyzeError::Numeric {
            section: name.to_string(),
            cause: e,
        }),
        Err(e) => Ok(Section::skip(component, digest, e.to_string())),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn analyze_path(input: &Path, opts: &AnalyzeOptions) -> Result<AnalysisBundle, AnalyzeError> {
    let file = load_grid(input)?;
    let graph = file.build().map_err(AnalyzeError::Invalid)?;
    let name = input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| input.display().to_string());
    analyze_graph(&graph, &name, &sha256_hex(&file.raw), opts)
}

pub fn analyze_graph(
    g: &GridGraph,
    input_name: &str,
    digest: &str,
    opts: &AnalyzeOptions,
) -> Result<AnalysisBundle, AnalyzeError> {
    if !(opts.removal_step > 0.0 && opts.removal_step <= 1.0) {
        return Err(AnalyzeError::Usage(format!(
            "--removal-step must be in (0, 1], got {}",
            opts.removal_step
        )));
    }
    if opts.baseline_trials == 0 {
        return Err(AnalyzeError::Usage("--baseline-trials must be at least 1".into()));
    }
    if g.is_empty() {
        return Err(AnalyzeError::Invalid(GridError::EmptyGraph));
    }
    let components = connected_components(g)
        .into_iter()
        .enumerate()
        .map(|(id, c)| analyze_component(id, &c.graph, digest, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let cost_surface = surface(&components, digest, opts)?;
    Ok(AnalysisBundle {
        format_version: FORMAT_VERSION,
        input_name: input_name.to_string(),
        digest: digest.to_string(),
        settings: Settings {
            seed: opts.seed,
            baseline_trials: opts.baseline_trials,
            removal_step: opts.removal_step,
            removal_trials: REMOVAL_TRIALS,
            resilience: opts.resilience,
            cost: opts.cost,
            bisection_depth: BISECTION_DEPTH,
        },
        order: g.order(),
        size: g.size(),
        components,
        cost_surface,
    })
}

fn analyze_component(
    id: usize,
    g: &GridGraph,
    digest: &str,
    opts: &AnalyzeOptions,
) -> Result<ComponentReport, AnalyzeError> {
    let c = Some(id);
    let metrics = section("metrics", c, digest, MetricsReport::compute(id, g))?;
    if g.order() < 2 {
        let reason = "needs at least 2 nodes";
        return Ok(ComponentReport {
            component_id: id,
            order: g.order(),
            size: g.size(),
            metrics,
            baseline: Section::skip(c, digest, reason),
            distributions: Section::skip(c, digest, reason),
            centrality: Section::skip(c, digest, reason),
            critical_edges: Section::skip(c, digest, reason),
            resilience: Section::skip(c, digest, reason),
            cost: Section::skip(c, digest, reason),
        });
    }

    let baseline = match &metrics.value {
        Some(m) => section("baseline", c, digest, baseline_section(g, m, opts))?,
        None => Section::skip(c, digest, "metrics unavailable"),
    };
    let distributions = section("distributions", c, digest, distributions_section(g, c, digest))?;
    let centrality = section("centrality", c, digest, centrality_section(g))?;
    let critical_edges = section("critical_edges", c, digest, critical_section(g))?;
    let resilience = if opts.resilience {
        section("resilience", c, digest, resilience_section(g, opts))?
    } else {
        Section::skip(c, digest, "disabled by --no-resilience")
    };
    let cost = if opts.cost {
        section("cost", c, digest, CostParams::compute(g, opts.seed))?
    } else {
        Section::skip(c, digest, "not requested (use --cost)")
    };
    Ok(ComponentReport {
        component_id: id,
        order: g.order(),
        size: g.size(),
        metrics,
        baseline,
        distributions,
        centrality,
        critical_edges,
        resilience,
        cost,
    })
}

fn baseline_section(g: &GridGraph, m: &MetricsReport, opts: &AnalyzeOptions) -> Result<BaselineComparison, GridError> {
    let random = baseline_metrics(g.order(), simple_size(g), opts.seed, opts.baseline_trials)?;
    let sample = SampleMetrics {
        order: m.order,
        avg_degree: m.avg_degree,
        cpl: m.cpl,
        cc: m.cc,
    };
    let small_world = small_world_test(&sample, random.cpl, random.cc, DEFAULT_CPL_TOLERANCE, DEFAULT_CC_DOMINANCE)?;
    Ok(BaselineComparison { random, small_world })
}

/// Edge count with parallel cables collapsed; random graphs are simple.
fn simple_size(g: &GridGraph) -> usize {
    (0..g.order()).map(|v| g.degree(v)).sum::<usize>() / 2
}

fn fit_section(ccdf: EmpiricalCcdf, c: Option<usize>, digest: &str) -> Result<DistributionFit, GridError> {
    let classification = match classify(&ccdf).and_then(finite_fits) {
        Ok(k) => Section::ok(c, digest, k),
        Err(e) if is_numeric_failure(&e) => return Err(e),
        Err(e) => Section::skip(c, digest, e.to_string()),
    };
    Ok(DistributionFit { ccdf, classification })
}

/// A fit that diverged to non-finite parameters cannot be reported.
fn finite_fits(
    k: gridnet_core::distributions_fit::Classification,
) -> Result<gridnet_core::distributions_fit::Classification, GridError> {
    let bad = k
        .fits
        .iter()
        .find(|f| !f.sse.is_finite() || f.params.iter().any(|p| !p.is_finite()));
    match bad {
        Some(f) => Err(GridError::InsufficientData(format!("{} fit diverged", f.model.name()))),
        None => Ok(k),
    }
}

fn distributions_section(g: &GridGraph, c: Option<usize>, digest: &str) -> Result<Distributions, GridError> {
    let b = betweenness(g, false)?;
    let bw = betweenness(g, true)?;
    Ok(Distributions {
        degree: fit_section(degree_ccdf(g, false), c, digest)?,
        weighted_degree: fit_section(degree_ccdf(g, true), c, digest)?,
        betweenness: fit_section(betweenness_ccdf(&b), c, digest)?,
        weighted_betweenness: fit_section(betweenness_ccdf(&bw), c, digest)?,
    })
}

fn ranking(r: CentralityRanking) -> Ranking {
    Ranking {
        iterations: r.iterations,
        top: r.top(TOP_K).to_vec(),
    }
}

fn centrality_section(g: &GridGraph) -> Result<Centrality, GridError> {
    Ok(Centrality {
        unweighted: ranking(eigenvector_centrality(g, false)?),
        weighted: ranking(eigenvector_centrality(g, true)?),
    })
}

fn critical_section(g: &GridGraph) -> Result<CriticalEdges, GridError> {
    let tree = recursive_bisect(g, BISECTION_DEPTH)?;
    Ok(CriticalEdges {
        depth: BISECTION_DEPTH,
        counts_by_level: tree.counts_by_level(),
        fiedler_value: tree.bisection.fiedler_value,
        first_cut: tree
            .bisection
            .critical_edges
            .iter()
            .map(|&(a, b)| (g.node(a).id.clone(), g.node(b).id.clone()))
            .collect(),
    })
}

pub fn removal_policies(seed: u64) -> Vec<RemovalPolicy> {
    vec![
        RemovalPolicy::random(seed),
        RemovalPolicy::targeted(PolicyKind::Degree).expect("targeted"),
        RemovalPolicy::targeted(PolicyKind::Betweenness).expect("targeted"),
        RemovalPolicy::targeted(PolicyKind::WeightedDegree).expect("targeted"),
    ]
}

fn resilience_section(
    g: &GridGraph,
    opts: &AnalyzeOptions,
) -> Result<Vec<gridnet_core::resilience::RemovalTrace>, GridError> {
    compare_policies(g, &removal_policies(opts.seed), opts.removal_step, REMOVAL_TRIALS)
}

/// Price surface spanning every network with complete cost parameters,
/// reference scales set to the largest observed alpha and beta.
fn surface(
    components: &[ComponentReport],
    digest: &str,
    opts: &AnalyzeOptions,
) -> Result<Section<gridnet_core::cost_model::PriceSurface>, AnalyzeError> {
    if !opts.cost {
        return Ok(Section::skip(None, digest, "not requested (use --cost)"));
    }
    let markers: Vec<Marker> = components
        .iter()
        .filter_map(|c| {
            c.cost.value.as_ref().map(|p| Marker {
                network_id: format!("component-{}", c.component_id),
                alpha: p.alpha,
                beta: p.beta,
            })
        })
        .collect();
    if markers.is_empty() {
        return Ok(Section::skip(None, digest, "no component has complete cost parameters"));
    }
    let a_max = markers.iter().map(|m| m.alpha.abs()).fold(0.0, f64::max);
    let b_max = markers.iter().map(|m| m.beta.abs()).fold(0.0, f64::max);
    let a_ref = if a_max > 0.0 { a_max } else { 1.0 };
    let b_ref = if b_max > 0.0 { b_max } else { 1.0 };
    let result = PriceConfig::new(1.0, a_ref, b_ref).and_then(|cfg| {
        price_surface(
            &linspace(0.0, 1.5 * a_ref, SURFACE_POINTS),
            &linspace(0.0, 1.5 * b_ref, SURFACE_POINTS),
            cfg,
            markers,
        )
    });
    section("cost_surface", None, digest, result)
}
