//! Cumulative distributions of degree and betweenness, and least-squares
//! fits of exponential, power-law and sum-of-two-exponentials models.
//!
//! Distributions are complementary cumulative: `p(x)` is the fraction of
//! nodes whose statistic is at least `x`, over the distinct observed values.
//! Fitting is damped Gauss-Newton (Levenberg-Marquardt with Marquardt
//! diagonal scaling) on unweighted residuals `model(x_i) - p_i`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::centrality::BetweennessVector;
use crate::error::{GridError, Result};
use crate::grid_model::GridGraph;
use crate::path_metrics::weighted_degrees;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    Degree,
    WeightedDegree,
    Betweenness,
    WeightedBetweenness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcdfPoint {
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCcdf {
    pub kind: StatisticKind,
    pub points: Vec<CcdfPoint>,
}

impl EmpiricalCcdf {
    /// CCDF over the distinct values in `values`. Values closer than one part
    /// in 1e9 are merged so that floating-point noise does not split ties.
    pub fn from_values(values: &[f64], kind: StatisticKind) -> Self {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mut points: Vec<CcdfPoint> = Vec::new();
        let mut i = 0;
        while i < v.len() {
            let x = v[i];
            points.push(CcdfPoint {
                x,
                p: (v.len() - i) as f64 / n,
            });
            let mut j = i + 1;
            while j < v.len() && (v[j] - x).abs() <= 1e-9 * x.abs().max(v[j].abs()) {
                j += 1;
            }
            i = j;
        }
        EmpiricalCcdf { kind, points }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p).collect()
    }

    /// Points with strictly positive x.
    pub fn positive_support(&self) -> EmpiricalCcdf {
        EmpiricalCcdf {
            kind: self.kind,
            points: self.points.iter().copied().filter(|p| p.x > 0.0).collect(),
        }
    }
}

/// Degree (or weighted degree) CCDF of a graph.
pub fn degree_ccdf(g: &GridGraph, weighted: bool) -> EmpiricalCcdf {
    if weighted {
        EmpiricalCcdf::from_values(&weighted_degrees(g), StatisticKind::WeightedDegree)
    } else {
        let d: Vec<f64> = (0..g.order()).map(|v| g.degree(v) as f64).collect();
        EmpiricalCcdf::from_values(&d, StatisticKind::Degree)
    }
}

pub fn betweenness_ccdf(b: &BetweennessVector) -> EmpiricalCcdf {
    let kind = if b.weighted_paths {
        StatisticKind::WeightedBetweenness
    } else {
        StatisticKind::Betweenness
    };
    EmpiricalCcdf::from_values(&b.values, kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// p = alpha * exp(beta * x); parameters [alpha, beta].
    Exponential,
    /// p = alpha * x^(-gamma); parameters [alpha, gamma].
    PowerLaw,
    /// p = a1 * exp(b1 * x) + a2 * exp(b2 * x); parameters [a1, b1, a2, b2].
    SumTwoExponentials,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Exponential, Model::PowerLaw, Model::SumTwoExponentials];

    pub fn parameter_count(self) -> usize {
        match self {
            Model::Exponential | Model::PowerLaw => 2,
            Model::SumTwoExponentials => 4,
        }
    }

    pub fn min_points(self) -> usize {
        match self {
            Model::Exponential | Model::PowerLaw => 3,
            Model::SumTwoExponentials => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Exponential => "exponential",
            Model::PowerLaw => "power_law",
            Model::SumTwoExponentials => "sum_two_exponentials",
        }
    }

    /// Model value at `x`; `None` where undefined (power law at x <= 0).
    pub fn eval(self, params: &[f64], x: f64) -> Option<f64> {
        match self {
            Model::Exponential => Some(params[0] * (params[1] * x).exp()),
            Model::PowerLaw if x > 0.0 => Some(params[0] * x.powf(-params[1])),
            Model::PowerLaw => None,
            Model::SumTwoExponentials => {
                Some(params[0] * (params[1] * x).exp() + params[2] * (params[3] * x).exp())
            }
        }
    }

    fn gradient(self, params: &[f64], x: f64, out: &mut [f64]) {
        match self {
            Model::Exponential => {
                let e = (params[1] * x).exp();
                out[0] = e;
                out[1] = params[0] * x * e;
            }
            Model::PowerLaw => {
                let t = x.powf(-params[1]);
                out[0] = t;
                out[1] = -params[0] * t * x.ln();
            }
            Model::SumTwoExponentials => {
                let e1 = (params[1] * x).exp();
                let e2 = (params[3] * x).exp();
                out[0] = e1;
                out[1] = params[0] * x * e1;
                out[2] = e2;
                out[3] = params[2] * x * e2;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: Model,
    pub params: Vec<f64>,
    pub sse: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub const LM_MAX_ITERATIONS: usize = 500;
pub const LM_RELATIVE_TOLERANCE: f64 = 1e-10;
const LM_LAMBDA_START: f64 = 1e-3;
const LM_LAMBDA_MAX: f64 = 1e16;

struct LmOutcome {
    params: Vec<f64>,
    sse: f64,
    converged: bool,
    iterations: usize,
    #[cfg_attr(not(test), allow(dead_code))]
    accepted_sse: Vec<f64>,
}

fn sse_of(model: Model, params: &[f64], xs: &[f64], ps: &[f64]) -> f64 {
    xs.iter()
        .zip(ps)
        .map(|(&x, &p)| {
            let r = model.eval(params, x).unwrap_or(f64::NAN) - p;
            r * r
        })
        .sum()
}

fn levenberg_marquardt(model: Model, init: &[f64], xs: &[f64], ps: &[f64]) -> LmOutcome {
    let k = model.parameter_count();
    let m = xs.len();
    let mut params = init.to_vec();
    let mut sse = sse_of(model, &params, xs, ps);
    let mut accepted_sse = vec![sse];
    let mut lambda = LM_LAMBDA_START;
    let mut grad = vec![0.0; k];
    let scale: f64 = ps.iter().map(|p| p * p).sum::<f64>().max(f64::MIN_POSITIVE);
    if !sse.is_finite() {
        return LmOutcome {
            params,
            sse,
            converged: false,
            iterations: 0,
            accepted_sse,
        };
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < LM_MAX_ITERATIONS {
        if sse <= 1e-30 * scale {
            converged = true;
            break;
        }
        iterations += 1;
        let mut jac = DMatrix::zeros(m, k);
        let mut res = DVector::zeros(m);
        for i in 0..m {
            model.gradient(&params, xs[i], &mut grad);
            for j in 0..k {
                jac[(i, j)] = grad[j];
            }
            res[i] = model.eval(&params, xs[i]).unwrap_or(f64::NAN) - ps[i];
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &res;
        let mut a = jtj.clone();
        for j in 0..k {
            let d = jtj[(j, j)].max(1e-30);
            a[(j, j)] += lambda * d;
        }
        let step = a.lu().solve(&(-jtr));
        let candidate: Option<Vec<f64>> = step.map(|s| params.iter().zip(s.iter()).map(|(p, d)| p + d).collect());
        let new_sse = candidate.as_ref().map(|c| sse_of(model, c, xs, ps)).unwrap_or(f64::INFINITY);
        if new_sse.is_finite() && new_sse < sse {
            let rel = (sse - new_sse) / sse;
            params = candidate.expect("finite sse implies a step");
            sse = new_sse;
            accepted_sse.push(sse);
            lambda = (lambda / 10.0).max(1e-12);
            if rel < LM_RELATIVE_TOLERANCE {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > LM_LAMBDA_MAX {
                // no descent direction left: a stationary point
                converged = true;
                break;
            }
        }
    }
    LmOutcome {
        params,
        sse,
        converged,
        iterations,
        accepted_sse,
    }
}

fn linear_regression(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Log-linear regression through the points with p > 0: returns (slope, intercept).
fn log_fit(xs: &[f64], ps: &[f64]) -> Option<(f64, f64)> {
    let (x, y): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ps)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&x, &p)| (x, p.ln()))
        .unzip();
    linear_regression(&x, &y)
}

fn default_inits(model: Model, xs: &[f64], ps: &[f64]) -> Vec<Vec<f64>> {
    match model {
        Model::Exponential => {
            let (slope, icpt) = log_fit(xs, ps).unwrap_or((0.0, 0.0));
            vec![vec![icpt.exp(), slope]]
        }
        Model::PowerLaw => {
            let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
            let (slope, icpt) = log_fit(&lx, ps).unwrap_or((0.0, 0.0));
            vec![vec![icpt.exp(), -slope]]
        }
        Model::SumTwoExponentials => {
            let mut inits = Vec::new();
            let (b, a) = log_fit(xs, ps).unwrap_or((0.0, 0.0));
            let (alpha, beta) = (a.exp(), b);
            // peel: slow tail first, then the fast residual at the head
            let half = xs.len() / 2;
            if let Some((b2, a2)) = log_fit(&xs[half..], &ps[half..]) {
                let (a2, b2) = (a2.exp(), b2);
                let resid: Vec<f64> = xs[..half.max(2)]
                    .iter()
                    .zip(&ps[..half.max(2)])
                    .map(|(&x, &p)| p - a2 * (b2 * x).exp())
                    .collect();
                if let Some((b1, a1)) = log_fit(&xs[..resid.len()], &resid) {
                    inits.push(vec![a1.exp(), b1, a2, b2]);
                }
                inits.push(vec![alpha - a2, 3.0 * b2, a2, b2]);
            }
            inits.push(vec![0.5 * alpha, 2.0 * beta, 0.5 * alpha, 0.5 * beta]);
            inits.push(vec![0.9 * alpha, 3.0 * beta, 0.1 * alpha, beta / 3.0]);
            inits
        }
    }
}

/// Fits `model` to the CCDF. Power-law fits use only points with x > 0.
pub fn fit(ccdf: &EmpiricalCcdf, model: Model, init: Option<&[f64]>) -> Result<FitResult> {
    let domain = if model == Model::PowerLaw {
        ccdf.positive_support()
    } else {
        ccdf.clone()
    };
    let xs = domain.xs();
    let ps = domain.ps();
    if xs.len() < model.min_points() {
        return Err(GridError::InsufficientData(format!(
            "{} fit needs at least {} points, got {}",
            model.name(),
            model.min_points(),
            xs.len()
        )));
    }
    if xs.iter().all(|&x| x == xs[0]) {
        return Err(GridError::InsufficientData("all x values are identical".into()));
    }
    let inits = match init {
        Some(p) if p.len() == model.parameter_count() => vec![p.to_vec()],
        Some(p) => {
            return Err(GridError::InvalidArgument(format!(
                "{} takes {} parameters, got {}",
                model.name(),
                model.parameter_count(),
                p.len()
            )))
        }
        None => default_inits(model, &xs, &ps),
    };
    let best = inits
        .iter()
        .map(|i| levenberg_marquardt(model, i, &xs, &ps))
        .filter(|o| o.sse.is_finite())
        .min_by(|a, b| a.sse.total_cmp(&b.sse))
        .ok_or_else(|| GridError::InsufficientData("no starting point gave a finite residual".into()))?;
    let mut warnings = Vec::new();
    match model {
        Model::PowerLaw if best.params[1] <= 1e-9 => {
            warnings.push(format!("power-law exponent {} is not positive (flat distribution)", best.params[1]))
        }
        Model::Exponential if best.params[1] >= 0.0 => {
            warnings.push(format!("exponential rate {} is not negative", best.params[1]))
        }
        _ => {}
    }
    if !best.converged {
        warnings.push(format!("stopped after {} iterations without converging", best.iterations));
    }
    Ok(FitResult {
        model,
        params: best.params,
        sse: best.sse,
        converged: best.converged,
        iterations: best.iterations,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub best_model: Model,
    pub fits: Vec<FitResult>,
}

/// The four-parameter model must beat the best two-parameter SSE by this factor.
pub const PARSIMONY_FACTOR: f64 = 2.0;

/// Fits all three models on the points with x > 0 (so every model is defined
/// on the same support) and picks the smallest SSE, subject to the parsimony
/// rule for the sum of exponentials.
pub fn classify(ccdf: &EmpiricalCcdf) -> Result<Classification> {
    let support = ccdf.positive_support();
    let exp = fit(&support, Model::Exponential, None)?;
    let pl = fit(&support, Model::PowerLaw, None)?;
    let sum = fit(&support, Model::SumTwoExponentials, None).ok();
    let (mut best_model, best_two) = if pl.sse < exp.sse {
        (Model::PowerLaw, pl.sse)
    } else {
        (Model::Exponential, exp.sse)
    };
    // a two-parameter fit at rounding-noise level is exact; nothing can beat it
    let scale: f64 = support.points.iter().map(|p| p.p * p.p).sum();
    if let Some(s) = &sum {
        if best_two > 1e-20 * scale && PARSIMONY_FACTOR * s.sse <= best_two {
            best_model = Model::SumTwoExponentials;
        }
    }
    let mut fits = vec![exp, pl];
    fits.extend(sum);
    Ok(Classification { best_model, fits })
}

/// Plot data: one row per CCDF point with the empirical value and every
/// fitted model's prediction (empty where the model is undefined).
pub fn plot_csv(ccdf: &EmpiricalCcdf, fits: &[FitResult]) -> std::result::Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x".to_string(), "p".to_string()];
    header.extend(fits.iter().map(|f| format!("{}_p", f.model.name())));
    w.write_record(&header)?;
    for pt in &ccdf.points {
        let mut row = vec![pt.x.to_string(), pt.p.to_string()];
        for f in fits {
            row.push(f.model.eval(&f.params, pt.x).map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
