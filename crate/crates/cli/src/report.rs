//! Output files and plain-text tables rendered from an analysis bundle.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gridnet_core::distributions_fit::EmpiricalCcdf;

use crate::bundle::{AnalysisBundle, ComponentReport, Section};

pub const TABLE_NAMES: [&str; 4] = ["metrics", "weighted", "critical", "centrality"];

/// Six significant digits, trailing zeros dropped.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=9).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_text<F>(header: &[&str], rows: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    rows(&mut w)?;
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn metrics_csv(bundle: &AnalysisBundle) -> Result<String> {
    csv_text(
        &[
            "component_id",
            "order",
            "size",
            "avg_degree",
            "apl",
            "cpl",
            "cc",
            "wcpl",
            "edge_avg_weight",
            "nwcpl",
            "avg_traversed_increase_pct",
            "random_apl",
            "random_cpl",
            "random_cc",
        ],
        |w| {
            for c in &bundle.components {
                let Some(m) = &c.metrics.value else { continue };
                let random = c.baseline.value.as_ref().map(|b| &b.random);
                let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
                w.write_record([
                    m.component_id.to_string(),
                    m.order.to_string(),
                    m.size.to_string(),
                    m.avg_degree.to_string(),
                    m.apl.to_string(),
                    m.cpl.to_string(),
                    m.cc.to_string(),
                    m.wcpl.to_string(),
                    m.edge_avg_weight.to_string(),
                    m.nwcpl.to_string(),
                    m.avg_traversed_increase_pct.to_string(),
                    opt(random.map(|r| r.apl)),
                    opt(random.map(|r| r.cpl)),
                    opt(random.map(|r| r.cc)),
                ])?;
            }
            Ok(())
        },
    )
}

fn ccdf_csv(ccdf: &EmpiricalCcdf) -> Result<String> {
    csv_text(&["x", "p"], |w| {
        for p in &ccdf.points {
            w.write_record([p.x.to_string(), p.p.to_string()])?;
        }
        Ok(())
    })
}

/// Writes `bundle.json` and the per-figure CSV files into `dir`; returns
/// the paths written.
pub fn write_outputs(bundle: &AnalysisBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files: Vec<(String, String)> = vec![
        ("bundle.json".into(), bundle.to_json()),
        ("metrics.csv".into(), metrics_csv(bundle)?),
    ];
    for c in &bundle.components {
        let id = c.component_id;
        if let Some(d) = &c.distributions.value {
            for (name, fit) in [
                ("degree", &d.degree),
                ("weighted_degree", &d.weighted_degree),
                ("betweenness", &d.betweenness),
                ("weighted_betweenness", &d.weighted_betweenness),
            ] {
                files.push((format!("{name}_ccdf_{id}.csv"), ccdf_csv(&fit.ccdf)?));
            }
        }
        if let Some(traces) = &c.resilience.value {
            for t in traces {
                files.push((format!("removal_{}_{id}.csv", t.policy.kind.as_str()), t.to_csv()?));
            }
        }
    }
    if let Some(s) = &bundle.cost_surface.value {
        files.push(("cost_surface.csv".into(), s.surface_csv()?));
        files.push(("cost_markers.csv".into(), s.markers_csv()?));
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

/// Left-aligned text table with a dashed rule under the header.
fn render(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        if r.len() == header.len() {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths.iter().chain(std::iter::repeat(&0)))
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = String::new();
    out.push_str(&line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>()));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

/// Row for a component whose section is missing: id then the reason.
fn skipped_row<T>(c: &ComponentReport, s: &Section<T>) -> Option<Vec<String>> {
    s.skip_label().map(|l| vec![c.component_id.to_string(), l])
}

pub fn table(bundle: &AnalysisBundle, name: &str) -> Option<String> {
    let rows_for = |f: &dyn Fn(&ComponentReport) -> Vec<String>, pick: &dyn Fn(&ComponentReport) -> Option<Vec<String>>| {
        bundle
            .components
            .iter()
            .map(|c| pick(c).unwrap_or_else(|| f(c)))
            .collect::<Vec<_>>()
    };
    let text = match name {
        "metrics" => render(
            &["ID", "Order", "Size", "Avg d", "APL", "CPL", "γ", "Random APL", "Random CPL", "Random γ"],
            &rows_for(
                &|c| {
                    let m = c.metrics.value.as_ref().expect("checked");
                    let mut row = vec![
                        c.component_id.to_string(),
                        m.order.to_string(),
                        m.size.to_string(),
                        sig6(m.avg_degree),
                        sig6(m.apl),
                        sig6(m.cpl),
                        sig6(m.cc),
                    ];
                    match (&c.baseline.value, c.baseline.skip_label()) {
                        (Some(b), _) => row.extend([sig6(b.random.apl), sig6(b.random.cpl), sig6(b.random.cc)]),
                        (None, label) => row.push(label.unwrap_or_default()),
                    }
                    row
                },
                &|c| skipped_row(c, &c.metrics),
            ),
        ),
        "weighted" => render(
            &["ID", "WCPL", "Edge Average Weight", "NWCPL"],
            &rows_for(
                &|c| {
                    let m = c.metrics.value.as_ref().expect("checked");
                    vec![c.component_id.to_string(), sig6(m.wcpl), sig6(m.edge_avg_weight), sig6(m.nwcpl)]
                },
                &|c| skipped_row(c, &c.metrics),
            ),
        ),
        "critical" => render(
            &["ID", "Order", "Fiedler value", "Critical edges by level"],
            &rows_for(
                &|c| {
                    let e = c.critical_edges.value.as_ref().expect("checked");
                    let levels: Vec<String> = e
                        .counts_by_level
                        .iter()
                        .map(|l| l.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","))
                        .collect();
                    vec![
                        c.component_id.to_string(),
                        c.order.to_string(),
                        sig6(e.fiedler_value),
                        format!("[{}]", levels.join("] [")),
                    ]
                },
                &|c| skipped_row(c, &c.critical_edges),
            ),
        ),
        "centrality" => {
            let mut rows = Vec::new();
            for c in &bundle.components {
                match &c.centrality.value {
                    None => rows.extend(skipped_row(c, &c.centrality)),
                    Some(k) => {
                        for (u, w) in k.unweighted.top.iter().zip(&k.weighted.top) {
                            rows.push(vec![
                                c.component_id.to_string(),
                                u.rank.to_string(),
                                u.id.clone(),
                                sig6(u.score),
                                w.id.clone(),
                                sig6(w.score),
                            ]);
                        }
                    }
                }
            }
            render(&["ID", "Rank", "Node", "Score", "Weighted node", "Weighted score"], &rows)
        }
        _ => return None,
    };
    Some(text)
}
