//! Serialised analysis results.

use gridnet_core::baselines::{BaselineMetrics, SmallWorldVerdict};
use gridnet_core::centrality::RankEntry;
use gridnet_core::cost_model::{CostParams, PriceSurface};
use gridnet_core::distributions_fit::{Classification, EmpiricalCcdf};
use gridnet_core::path_metrics::MetricsReport;
use gridnet_core::resilience::RemovalTrace;
use serde::{Deserialize, Serialize};

/// One analysis result, tagged with where it came from. Exactly one of
/// `value` and `skipped` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section<T> {
    pub component_id: Option<usize>,
    pub digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl<T> Section<T> {
    pub fn ok(component_id: Option<usize>, digest: &str, value: T) -> Self {
        Section {
            component_id,
            digest: digest.to_string(),
            value: Some(value),
            skipped: None,
        }
    }

    pub fn skip(component_id: Option<usize>, digest: &str, reason: impl Into<String>) -> Self {
        Section {
            component_id,
            digest: digest.to_string(),
            value: None,
            skipped: Some(reason.into()),
        }
    }

    /// "skipped: <reason>" for absent sections.
    pub fn skip_label(&self) -> Option<String> {
        self.skipped.as_ref().map(|r| format!("skipped: {r}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub random: BaselineMetrics,
    pub small_world: SmallWorldVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionFit {
    pub ccdf: EmpiricalCcdf,
    pub classification: Section<Classification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distributions {
    pub degree: DistributionFit,
    pub weighted_degree: DistributionFit,
    pub betweenness: DistributionFit,
    pub weighted_betweenness: DistributionFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub iterations: usize,
    pub top: Vec<RankEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centrality {
    pub unweighted: Ranking,
    pub weighted: Ranking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEdges {
    pub depth: usize,
    /// Crossing-cable counts per level, root first, left to right.
    pub counts_by_level: Vec<Vec<usize>>,
    pub fiedler_value: f64,
    /// Crossing cables of the first bisection, as node id pairs.
    pub first_cut: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub component_id: usize,
    pub order: usize,
    pub size: usize,
    pub metrics: Section<MetricsReport>,
    pub baseline: Section<BaselineComparison>,
    pub distributions: Section<Distributions>,
    pub centrality: Section<Centrality>,
    pub critical_edges: Section<CriticalEdges>,
    pub resilience: Section<Vec<RemovalTrace>>,
    pub cost: Section<CostParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub seed: u64,
    pub baseline_trials: usize,
    pub removal_step: f64,
    pub removal_trials: usize,
    pub resilience: bool,
    pub cost: bool,
    pub bisection_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub format_version: u32,
    pub input_name: String,
    /// SHA-256 of the input bytes, hex.
    pub digest: String,
    pub settings: Settings,
    pub order: usize,
    pub size: usize,
    pub components: Vec<ComponentReport>,
    pub cost_surface: Section<PriceSurface>,
}

impl AnalysisBundle {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("bundle serialises");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
