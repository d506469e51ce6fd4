//! Node-removal simulation tracking the relative order of the largest
//! connected component.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::seeded_rng;
use crate::centrality::{betweenness_values, PathCredit};
use crate::error::{GridError, Result};
use crate::grid_model::GridGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    Degree,
    Betweenness,
    WeightedDegree,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::Degree => "degree",
            PolicyKind::Betweenness => "betweenness",
            PolicyKind::WeightedDegree => "weighted_degree",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalPolicy {
    pub kind: PolicyKind,
    /// Set exactly when `kind` is random.
    pub seed: Option<u64>,
    /// Re-rank survivors before every batch instead of ranking once.
    pub recompute: bool,
}

impl RemovalPolicy {
    pub fn random(seed: u64) -> Self {
        RemovalPolicy {
            kind: PolicyKind::Random,
            seed: Some(seed),
            recompute: true,
        }
    }

    /// Targeted policy with adaptive re-ranking.
    pub fn targeted(kind: PolicyKind) -> Result<Self> {
        let p = RemovalPolicy {
            kind,
            seed: None,
            recompute: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_recompute(mut self, recompute: bool) -> Self {
        self.recompute = recompute;
        self
    }

    fn validate(&self) -> Result<()> {
        if (self.kind == PolicyKind::Random) != self.seed.is_some() {
            return Err(GridError::InvalidArgument(format!(
                "{} policy: a seed is required for random removal and only for it",
                self.kind.as_str()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Fraction of the original nodes removed so far.
    pub f: f64,
    /// Largest component order over the original order.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalTrace {
    pub points: Vec<TracePoint>,
    pub policy: RemovalPolicy,
    pub original_order: usize,
}

impl RemovalTrace {
    pub fn to_csv(&self) -> std::result::Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["f", "s"])?;
        for p in &self.points {
            w.write_record([p.f.to_string(), p.s.to_string()])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
    }
}

/// Number of nodes removed per batch. The tiny slack keeps e.g. 0.1 * 30
/// from rounding up to 4.
pub fn batch_size(step: f64, order: usize) -> usize {
    ((step * order as f64 - 1e-9).ceil() as usize).max(1)
}

struct Survivors<'g> {
    g: &'g GridGraph,
    alive: Vec<bool>,
    remaining: usize,
}

impl<'g> Survivors<'g> {
    fn new(g: &'g GridGraph) -> Self {
        Survivors {
            g,
            alive: vec![true; g.order()],
            remaining: g.order(),
        }
    }

    fn remove(&mut self, v: usize) {
        debug_assert!(self.alive[v]);
        self.alive[v] = false;
        self.remaining -= 1;
    }

    fn largest_component(&self) -> usize {
        let n = self.g.order();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        let mut best = 0;
        for s in 0..n {
            if !self.alive[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut size = 0;
            while let Some(u) = queue.pop_front() {
                size += 1;
                for &(w, _) in self.g.neighbors(u) {
                    if self.alive[w] && !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            best = best.max(size);
        }
        best
    }

    /// Policy metric for every node; removed nodes get `NEG_INFINITY`.
    fn scores(&self, kind: PolicyKind) -> Vec<f64> {
        let n = self.g.order();
        let mut out = vec![f64::NEG_INFINITY; n];
        match kind {
            PolicyKind::Degree | PolicyKind::WeightedDegree => {
                for v in (0..n).filter(|&v| self.alive[v]) {
                    out[v] = self
                        .g
                        .neighbors(v)
                        .iter()
                        .filter(|&&(w, _)| self.alive[w])
                        .map(|&(_, wt)| if kind == PolicyKind::Degree { 1.0 } else { wt })
                        .sum();
                }
            }
            PolicyKind::Betweenness => {
                let keep: Vec<usize> = (0..n).filter(|&v| self.alive[v]).collect();
                let sub = self.g.induced_subgraph(&keep);
                let values = betweenness_values(&sub.graph, false, PathCredit::Share);
                for (i, &v) in sub.original.iter().enumerate() {
                    out[v] = values[i];
                }
            }
            PolicyKind::Random => unreachable!("random removal has no metric"),
        }
        out
    }
}

/// Survivors ordered by descending score, ties by ascending index. Scores
/// are compared after rounding to 1e-9 of the largest magnitude so that
/// floating-point noise between symmetric nodes does not break ties.
fn ranked(scores: &[f64]) -> Vec<usize> {
    let scale = scores
        .iter()
        .filter(|s| s.is_finite())
        .fold(0.0f64, |m, s| m.max(s.abs()))
        .max(f64::MIN_POSITIVE);
    let key = |s: f64| (s / scale * 1e9).round() as i64;
    let mut order: Vec<usize> = (0..scores.len()).filter(|&v| scores[v].is_finite()).collect();
    order.sort_by(|&a, &b| key(scores[b]).cmp(&key(scores[a])).then(a.cmp(&b)));
    order
}

/// Removes batches of `ceil(step * N0)` nodes until none remain, recording
/// `(f, s)` after every batch.
pub fn simulate_removal(g: &GridGraph, policy: RemovalPolicy, step: f64) -> Result<RemovalTrace> {
    if g.is_empty() {
        return Err(GridError::EmptyGraph);
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(GridError::InvalidArgument(format!("removal step must be in (0, 1], got {step}")));
    }
    policy.validate()?;
    let n = g.order();
    let batch = batch_size(step, n);
    let mut state = Survivors::new(g);
    let mut points = vec![TracePoint {
        f: 0.0,
        s: state.largest_component() as f64 / n as f64,
    }];

    let mut fixed_order: Option<Vec<usize>> = match policy.kind {
        PolicyKind::Random => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut seeded_rng(policy.seed.expect("validated")));
            Some(order)
        }
        kind if !policy.recompute => Some(ranked(&state.scores(kind))),
        _ => None,
    };
    if let Some(order) = fixed_order.as_mut() {
        order.reverse();
    }

    let mut removed = 0;
    while state.remaining > 0 {
        let take = batch.min(state.remaining);
        let victims: Vec<usize> = match fixed_order.as_mut() {
            Some(order) => (0..take).map(|_| order.pop().expect("enough survivors")).collect(),
            None => ranked(&state.scores(policy.kind)).into_iter().take(take).collect(),
        };
        for v in victims {
            state.remove(v);
        }
        removed += take;
        points.push(TracePoint {
            f: removed as f64 / n as f64,
            s: state.largest_component() as f64 / n as f64,
        });
    }
    Ok(RemovalTrace {
        points,
        policy,
        original_order: n,
    })
}

/// `s` at the largest recorded `f' <= f`.
pub fn robustness_at(trace: &RemovalTrace, f: f64) -> f64 {
    let mut s = trace.points.first().map(|p| p.s).unwrap_or(0.0);
    for p in &trace.points {
        if p.f <= f + 1e-12 {
            s = p.s;
        } else {
            break;
        }
    }
    s
}

/// One trace per policy. Random policies are run `trials` times with seeds
/// `seed, seed + 1, ...` and reported as the pointwise mean.
pub fn compare_policies(
    g: &GridGraph,
    policies: &[RemovalPolicy],
    step: f64,
    trials: usize,
) -> Result<Vec<RemovalTrace>> {
    if trials == 0 {
        return Err(GridError::InvalidArgument("trials must be at least 1".into()));
    }
    policies
        .iter()
        .map(|&policy| match policy.kind {
            PolicyKind::Random => random_mean_trace(g, policy, step, trials),
            _ => simulate_removal(g, policy, step),
        })
        .collect()
}

fn random_mean_trace(g: &GridGraph, policy: RemovalPolicy, step: f64, trials: usize) -> Result<RemovalTrace> {
    policy.validate()?;
    let seed = policy.seed.expect("validated");
    let runs: Vec<RemovalTrace> = (0..trials)
        .into_par_iter()
        .map(|t| simulate_removal(g, RemovalPolicy::random(seed.wrapping_add(t as u64)), step))
        .collect::<Result<_>>()?;
    let mut points = runs[0].points.clone();
    for (i, p) in points.iter_mut().enumerate() {
        p.s = runs.iter().map(|r| r.points[i].s).sum::<f64>() / trials as f64;
    }
    Ok(RemovalTrace {
        points,
        policy,
        original_order: g.order(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{complete, path, star};

    fn degree() -> RemovalPolicy {
        RemovalPolicy::targeted(PolicyKind::Degree).unwrap()
    }

    #[test]
    fn star_hub_first() {
        let t = simulate_removal(&star(5), degree(), 0.2).unwrap();
        assert_eq!(t.points[0].s, 1.0);
        assert_eq!(t.points[1].f, 0.2);
        assert_eq!(t.points[1].s, 0.2);
        assert_eq!(t.points.last().unwrap().s, 0.0);
        assert_eq!(t.points.last().unwrap().f, 1.0);
    }

    // Hand simulation of adaptive degree removal on P10 (nodes 0..9), one
    // node per batch, highest degree first and lowest index on ties:
    //   1 -> {0} {2..9}: 8    3 -> {2} {4..9}: 6    5 -> {6..9}: 4
    //   7 -> {8,9}: 2         8 -> singletons: 1
    //   then the isolated 0,2,4,6,9 go one by one: 1,1,1,1,0
    #[test]
    fn path_hand_simulation() {
        let t = simulate_removal(&path(10), degree(), 0.1).unwrap();
        let s: Vec<f64> = t.points.iter().map(|p| p.s).collect();
        let expect = [1.0, 0.8, 0.6, 0.4, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.0];
        assert_eq!(s.len(), expect.len());
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{s:?}");
        }
    }

    #[test]
    fn p3_middle_first() {
        let t = simulate_removal(&path(3), degree(), 1.0 / 3.0).unwrap();
        assert!((t.points[1].f - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.points[1].s - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn step_function_lookup() {
        let trace = RemovalTrace {
            points: vec![
                TracePoint { f: 0.0, s: 1.0 },
                TracePoint { f: 0.2, s: 0.6 },
                TracePoint { f: 0.4, s: 0.1 },
            ],
            policy: degree(),
            original_order: 5,
        };
        assert_eq!(robustness_at(&trace, 0.2), 0.6);
        assert_eq!(robustness_at(&trace, 0.0), 1.0);
        assert_eq!(robustness_at(&trace, 0.3), 0.6);
    }

    #[test]
    fn star_random_expectation() {
        // exact expectation of s after one uniform removal from S5 is 0.68
        let traces = compare_policies(&star(5), &[degree(), RemovalPolicy::random(0)], 0.2, 4000).unwrap();
        let d = robustness_at(&traces[0], 0.2);
        let r = robustness_at(&traces[1], 0.2);
        assert!(d <= r);
        assert!((r - 0.68).abs() < 0.02, "{r}");
    }

    #[test]
    fn random_is_seed_reproducible() {
        let g = complete(12);
        let a = simulate_removal(&g, RemovalPolicy::random(3), 0.1).unwrap();
        let b = simulate_removal(&g, RemovalPolicy::random(3), 0.1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn static_ranking_differs_from_adaptive() {
        let fixed = simulate_removal(&path(10), degree().with_recompute(false), 0.1).unwrap();
        // rank once: 1..8 all degree 2, removed in index order 1,2,3,...
        assert_eq!(fixed.points[1].s, 0.8);
        assert_eq!(fixed.points[2].s, 0.7);
        assert_eq!(fixed.points[3].s, 0.6);
    }

    #[test]
    fn betweenness_policy_on_path() {
        let t = simulate_removal(&path(5), RemovalPolicy::targeted(PolicyKind::Betweenness).unwrap(), 0.2).unwrap();
        // centre node 2 carries most paths
        assert_eq!(t.points[1].s, 0.4);
    }

    #[test]
    fn invalid_policies() {
        let bad = RemovalPolicy {
            kind: PolicyKind::Degree,
            seed: Some(1),
            recompute: true,
        };
        assert!(simulate_removal(&path(3), bad, 0.5).is_err());
        assert!(simulate_removal(&path(3), degree(), 0.0).is_err());
    }

    #[test]
    fn batch_rounding() {
        assert_eq!(batch_size(0.1, 30), 3);
        assert_eq!(batch_size(0.05, 10), 1);
        assert_eq!(batch_size(0.05, 1000), 50);
        assert_eq!(batch_size(0.2, 3), 1);
    }
}
