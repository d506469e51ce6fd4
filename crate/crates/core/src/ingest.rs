//! Grid description files and synthetic grid generation.
//!
//! A grid is either a directory holding two CSV tables
//!
//! ```text
//! nodes.csv   id,kind
//! edges.csv   from,to,resistance_ohm_per_km,length_km,is_link,max_current_a
//! ```
//!
//! or a single JSON document `{"version": 1, "nodes": [...], "edges": [...]}`
//! using the same field names. `kind` is one of `substation`, `transformer`,
//! `consumer`; `is_link` is 0 or 1, and link rows may leave the resistance
//! cells empty. `max_current_a` is optional everywhere.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{connected_edge_list, numbered_nodes, seeded_rng};
use crate::error::GridError;
use crate::grid_model::{build_graph, EdgeRecord, GridGraph, NodeKind, NodeRecord};

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const NODES_HEADER: [&str; 2] = ["id", "kind"];
pub const EDGES_HEADER: [&str; 6] = ["from", "to", "resistance_ohm_per_km", "length_km", "is_link", "max_current_a"];
pub const FORMAT_VERSION: u32 = 1;

/// Parse failure with the file and line (or JSON record number) it refers to.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{file}: malformed header: expected `{expected}`, found `{found}`")]
    MalformedHeader {
        file: String,
        expected: String,
        found: String,
    },
    #[error("{file} line {line}: malformed row: {message}")]
    MalformedRow { file: String, line: u64, message: String },
    #[error("{file} line {line}: missing required field `{field}`")]
    MissingField {
        file: String,
        line: u64,
        field: &'static str,
    },
    #[error("{file} line {line}: field `{field}` is not a number: `{value}`")]
    InvalidNumber {
        file: String,
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("{file} line {line}: invalid value `{value}` for `{field}`")]
    InvalidValue {
        file: String,
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("{file} line {line}: duplicate node id `{id}`")]
    DuplicateNode { file: String, line: u64, id: String },
    #[error("{file} line {line}: edge references undeclared node `{id}`")]
    UnknownEndpoint { file: String, line: u64, id: String },
    #[error("{file} line {line}: {source}")]
    InvalidEdge {
        file: String,
        line: u64,
        source: GridError,
    },
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("JSON error at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Records read from a grid file, plus the raw bytes they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub raw: Vec<u8>,
}

impl GridFile {
    pub fn build(&self) -> Result<GridGraph, GridError> {
        build_graph(self.nodes.clone(), self.edges.clone())
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(file: &str, rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), ParseError> {
    let header = rdr.headers().map_err(|e| ParseError::MalformedHeader {
        file: file.into(),
        expected: expected.join(","),
        found: e.to_string(),
    })?;
    let found: Vec<&str> = header.iter().collect();
    if found != expected {
        return Err(ParseError::MalformedHeader {
            file: file.into(),
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(())
}

fn row_error(file: &str, e: csv::Error) -> ParseError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    ParseError::MalformedRow {
        file: file.into(),
        line,
        message: e.to_string(),
    }
}

pub fn parse_nodes_csv(text: &str) -> Result<Vec<NodeRecord>, ParseError> {
    let file = NODES_FILE;
    let mut rdr = reader(text);
    check_header(file, &mut rdr, &NODES_HEADER)?;
    let mut seen: HashMap<String, u64> = HashMap::new();
    let mut nodes = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| row_error(file, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let id = required(file, line, "id", row.get(0))?;
        let kind_text = required(file, line, "kind", row.get(1))?;
        let kind: NodeKind = kind_text.parse().map_err(|_| ParseError::InvalidValue {
            file: file.into(),
            line,
            field: "kind",
            value: kind_text.into(),
        })?;
        if seen.insert(id.to_string(), line).is_some() {
            return Err(ParseError::DuplicateNode {
                file: file.into(),
                line,
                id: id.into(),
            });
        }
        nodes.push(NodeRecord::new(id, kind));
    }
    Ok(nodes)
}

fn required<'a>(file: &str, line: u64, field: &'static str, cell: Option<&'a str>) -> Result<&'a str, ParseError> {
    match cell {
        Some(s) if !s.is_empty() => Ok(s),
        _ => Err(ParseError::MissingField {
            file: file.into(),
            line,
            field,
        }),
    }
}

fn optional_number(file: &str, line: u64, field: &'static str, cell: Option<&str>) -> Result<Option<f64>, ParseError> {
    match cell {
        None | Some("") => Ok(None),
        Some(s) => s.parse::<f64>().map(Some).map_err(|_| ParseError::InvalidNumber {
            file: file.into(),
            line,
            field,
            value: s.into(),
        }),
    }
}

pub fn parse_edges_csv(text: &str) -> Result<Vec<(u64, EdgeRecord)>, ParseError> {
    let file = EDGES_FILE;
    let mut rdr = reader(text);
    check_header(file, &mut rdr, &EDGES_HEADER)?;
    let mut edges = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| row_error(file, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let from = required(file, line, "from", row.get(0))?;
        let to = required(file, line, "to", row.get(1))?;
        let resistance = optional_number(file, line, "resistance_ohm_per_km", row.get(2))?;
        let length = optional_number(file, line, "length_km", row.get(3))?;
        let is_link = match required(file, line, "is_link", row.get(4))? {
            "0" => false,
            "1" => true,
            other => {
                return Err(ParseError::InvalidValue {
                    file: file.into(),
                    line,
                    field: "is_link",
                    value: other.into(),
                })
            }
        };
        let max_current = optional_number(file, line, "max_current_a", row.get(5))?;
        if !is_link {
            if resistance.is_none() {
                return Err(ParseError::MissingField {
                    file: file.into(),
                    line,
                    field: "resistance_ohm_per_km",
                });
            }
            if length.is_none() {
                return Err(ParseError::MissingField {
                    file: file.into(),
                    line,
                    field: "length_km",
                });
            }
        }
        edges.push((
            line,
            EdgeRecord {
                from: from.into(),
                to: to.into(),
                resistance_ohm_per_km: resistance,
                length_km: length,
                is_link,
                max_current_a: max_current,
            },
        ));
    }
    Ok(edges)
}

/// Checks every edge against the declared nodes and the construction rules,
/// reporting the offending line.
fn validate_edges(file: &str, nodes: &[NodeRecord], edges: &[(u64, EdgeRecord)]) -> Result<(), ParseError> {
    let ids: HashMap<&str, ()> = nodes.iter().map(|n| (n.id.as_str(), ())).collect();
    for (line, e) in edges {
        for id in [&e.from, &e.to] {
            if !ids.contains_key(id.as_str()) {
                return Err(ParseError::UnknownEndpoint {
                    file: file.into(),
                    line: *line,
                    id: id.clone(),
                });
            }
        }
        let pair = [
            NodeRecord::new(e.from.clone(), NodeKind::Substation),
            NodeRecord::new(e.to.clone(), NodeKind::Substation),
        ];
        let probe_nodes = if e.from == e.to { pair[..1].to_vec() } else { pair.to_vec() };
        build_graph(probe_nodes, vec![e.clone()]).map_err(|source| ParseError::InvalidEdge {
            file: file.into(),
            line: *line,
            source,
        })?;
    }
    Ok(())
}

/// Parses the two CSV tables of a grid.
pub fn parse_grid(nodes_csv: &str, edges_csv: &str) -> Result<(Vec<NodeRecord>, Vec<EdgeRecord>), ParseError> {
    let nodes = parse_nodes_csv(nodes_csv)?;
    let edges = parse_edges_csv(edges_csv)?;
    validate_edges(EDGES_FILE, &nodes, &edges)?;
    Ok((nodes, edges.into_iter().map(|(_, e)| e).collect()))
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonGrid {
    version: u32,
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
}

pub fn parse_grid_json(text: &str) -> Result<(Vec<NodeRecord>, Vec<EdgeRecord>), ParseError> {
    let doc: JsonGrid = serde_json::from_str(text).map_err(|e| ParseError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.version != FORMAT_VERSION {
        return Err(ParseError::UnsupportedVersion(doc.version));
    }
    let file = "edges[]";
    let mut seen = HashMap::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        if seen.insert(n.id.as_str(), i).is_some() {
            return Err(ParseError::DuplicateNode {
                file: "nodes[]".into(),
                line: i as u64 + 1,
                id: n.id.clone(),
            });
        }
    }
    let numbered: Vec<(u64, EdgeRecord)> = doc
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| (i as u64 + 1, e.clone()))
        .collect();
    for (line, e) in &numbered {
        if !e.is_link {
            if e.resistance_ohm_per_km.is_none() {
                return Err(ParseError::MissingField {
                    file: file.into(),
                    line: *line,
                    field: "resistance_ohm_per_km",
                });
            }
            if e.length_km.is_none() {
                return Err(ParseError::MissingField {
                    file: file.into(),
                    line: *line,
                    field: "length_km",
                });
            }
        }
    }
    validate_edges(file, &doc.nodes, &numbered)?;
    Ok((doc.nodes, doc.edges))
}

fn read(path: &Path) -> Result<Vec<u8>, ParseError> {
    fs::read(path).map_err(|e| ParseError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn utf8(path: &Path, bytes: &[u8]) -> Result<String, ParseError> {
    String::from_utf8(bytes.to_vec()).map_err(|e| ParseError::Io {
        path: path.display().to_string(),
        message: format!("not UTF-8: {e}"),
    })
}

/// Loads a grid directory (`nodes.csv` + `edges.csv`) or a `.json` file.
pub fn load_grid(path: &Path) -> Result<GridFile, ParseError> {
    if path.is_dir() {
        let np = path.join(NODES_FILE);
        let ep = path.join(EDGES_FILE);
        let nb = read(&np)?;
        let eb = read(&ep)?;
        let (nodes, edges) = parse_grid(&utf8(&np, &nb)?, &utf8(&ep, &eb)?)?;
        let mut raw = nb;
        raw.extend_from_slice(&eb);
        Ok(GridFile { nodes, edges, raw })
    } else {
        let raw = read(path)?;
        let (nodes, edges) = parse_grid_json(&utf8(path, &raw)?)?;
        Ok(GridFile { nodes, edges, raw })
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serialises records to the two CSV tables `(nodes.csv, edges.csv)`.
pub fn write_grid_csv(nodes: &[NodeRecord], edges: &[EdgeRecord]) -> Result<(String, String), csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(NODES_HEADER)?;
    for n in nodes {
        w.write_record([n.id.as_str(), n.kind.as_str()])?;
    }
    let nodes_text = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EDGES_HEADER)?;
    for e in edges {
        w.write_record([
            e.from.clone(),
            e.to.clone(),
            cell(e.resistance_ohm_per_km),
            cell(e.length_km),
            if e.is_link { "1".into() } else { "0".into() },
            cell(e.max_current_a),
        ])?;
    }
    let edges_text = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8");
    Ok((nodes_text, edges_text))
}

pub fn write_grid_json(nodes: &[NodeRecord], edges: &[EdgeRecord]) -> String {
    serde_json::to_string_pretty(&JsonGrid {
        version: FORMAT_VERSION,
        nodes: nodes.to_vec(),
        edges: edges.to_vec(),
    })
    .expect("grid records always serialise")
}

/// Writes `nodes.csv` and `edges.csv` into `dir`, creating it if needed.
pub fn save_grid_dir(dir: &Path, nodes: &[NodeRecord], edges: &[EdgeRecord]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let (n, e) = write_grid_csv(nodes, edges).map_err(std::io::Error::other)?;
    fs::write(dir.join(NODES_FILE), n)?;
    fs::write(dir.join(EDGES_FILE), e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightDist {
    Uniform(f64, f64),
    Constant(f64),
}

impl WeightDist {
    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            WeightDist::Constant(w) => w,
            WeightDist::Uniform(a, b) if a == b => a,
            WeightDist::Uniform(a, b) => rng.random_range(a..b),
        }
    }

    fn validate(self) -> Result<(), GridError> {
        let ok = match self {
            WeightDist::Constant(w) => w > 0.0 && w.is_finite(),
            WeightDist::Uniform(a, b) => a > 0.0 && a <= b && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(GridError::InvalidArgument(format!("weight distribution {self:?} must be positive")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub order: usize,
    pub size: usize,
    /// Cable resistance in Ohm (written as Ohm/km over a 1 km length).
    pub weight_dist: WeightDist,
    /// Optional max current per cable, in Ampere.
    pub current_dist: Option<WeightDist>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(order: usize, size: usize, weight_dist: WeightDist, seed: u64) -> Self {
        SyntheticSpec {
            order,
            size,
            weight_dist,
            current_dist: None,
            seed,
        }
    }
}

/// Records of a random connected grid; deterministic for a fixed seed.
pub fn synthetic_records(spec: &SyntheticSpec) -> Result<(Vec<NodeRecord>, Vec<EdgeRecord>), GridError> {
    spec.weight_dist.validate()?;
    if let Some(c) = spec.current_dist {
        c.validate()?;
    }
    let mut rng = seeded_rng(spec.seed);
    let pairs = connected_edge_list(spec.order, spec.size, &mut rng)?;
    let nodes = numbered_nodes(spec.order);
    let edges = pairs
        .into_iter()
        .map(|(a, b)| {
            let w = spec.weight_dist.draw(&mut rng);
            let mut e = EdgeRecord::cable(nodes[a].id.clone(), nodes[b].id.clone(), w, 1.0);
            e.max_current_a = spec.current_dist.map(|c| c.draw(&mut rng));
            e
        })
        .collect();
    Ok((nodes, edges))
}

pub fn generate_synthetic_grid(spec: &SyntheticSpec) -> Result<GridGraph, GridError> {
    let (nodes, edges) = synthetic_records(spec)?;
    build_graph(nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NODES: &str = "id,kind\nA,substation\nB,consumer\n";

    #[test]
    fn minimal_file() {
        let (n, e) = parse_grid(NODES, "from,to,resistance_ohm_per_km,length_km,is_link,max_current_a\nA,B,0.25,2,0,\n").unwrap();
        assert_eq!(n.len(), 2);
        assert_eq!(n[1].kind, NodeKind::Consumer);
        assert_eq!(e[0].resistance_ohm_per_km, Some(0.25));
        assert_eq!(e[0].length_km, Some(2.0));
        assert_eq!(e[0].max_current_a, None);
    }

    #[test]
    fn undeclared_endpoint_names_id_and_line() {
        let err = parse_grid(
            NODES,
            "from,to,resistance_ohm_per_km,length_km,is_link,max_current_a\nA,B,1,1,0,\nA,Q,1,1,0,\n",
        )
        .unwrap_err();
        match err {
            ParseError::UnknownEndpoint { line, id, .. } => assert_eq!((line, id.as_str()), (3, "Q")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_text(NODES, "from,to,resistance_ohm_per_km,length_km,is_link,max_current_a\nA,Q,1,1,0,\n").contains("line 2"));
    }

    fn err_text(n: &str, e: &str) -> String {
        parse_grid(n, e).unwrap_err().to_string()
    }

    #[test]
    fn link_without_resistance() {
        let (_, e) = parse_grid(NODES, "from,to,resistance_ohm_per_km,length_km,is_link,max_current_a\nA,B,,,1,\n").unwrap();
        assert!(e[0].is_link);
        assert_eq!(e[0].resistance_ohm_per_km, None);
    }

    #[test]
    fn error_variants() {
        let h = "from,to,resistance_ohm_per_km,length_km,is_link,max_current_a\n";
        assert!(matches!(parse_grid("name,kind\n", h), Err(ParseError::MalformedHeader { .. })));
        assert!(matches!(parse_grid(NODES, "from,to\n"), Err(ParseError::MalformedHeader { .. })));
        assert!(matches!(
            parse_grid(NODES, &format!("{h}A,B,abc,1,0,\n")),
            Err(ParseError::InvalidNumber { line: 2, field: "resistance_ohm_per_km", .. })
        ));
        assert!(matches!(
            parse_grid(NODES, &format!("{h}A,B,1,,0,\n")),
            Err(ParseError::MissingField { field: "length_km", .. })
        ));
        assert!(matches!(
            parse_grid("id,kind\nA,substation\nA,consumer\n", h),
            Err(ParseError::DuplicateNode { line: 3, .. })
        ));
        assert!(matches!(
            parse_grid("id,kind\nA,plant\n", h),
            Err(ParseError::InvalidValue { field: "kind", .. })
        ));
        assert!(matches!(
            parse_grid(NODES, &format!("{h}A,A,1,1,0,\n")),
            Err(ParseError::InvalidEdge { line: 2, source: GridError::SelfLoop(_), .. })
        ));
        assert!(matches!(
            parse_grid(NODES, &format!("{h}A,B,-1,1,0,\n")),
            Err(ParseError::InvalidEdge { line: 2, .. })
        ));
        assert!(matches!(
            parse_grid(NODES, &format!("{h}A,B,1,1,2,\n")),
            Err(ParseError::InvalidValue { field: "is_link", .. })
        ));
        assert!(matches!(parse_grid(NODES, &format!("{h}A,B,1\n")), Err(ParseError::MalformedRow { .. })));
    }

    #[test]
    fn json_mirror() {
        let text = r#"{"version":1,"nodes":[{"id":"A","kind":"substation"},{"id":"B","kind":"transformer"}],
            "edges":[{"from":"A","to":"B","resistance_ohm_per_km":0.5,"length_km":2,"is_link":0,"max_current_a":120}]}"#;
        let (n, e) = parse_grid_json(text).unwrap();
        assert_eq!(n.len(), 2);
        assert_eq!(e[0].max_current_a, Some(120.0));
        let g = build_graph(n, e).unwrap();
        assert_eq!(g.edges()[0].weight, 1.0);
        assert!(matches!(parse_grid_json(r#"{"version":2,"nodes":[],"edges":[]}"#), Err(ParseError::UnsupportedVersion(2))));
        assert!(matches!(
            parse_grid_json(r#"{"version":1,"nodes":[{"id":"A","kind":"substation"}],"edges":[{"from":"A","to":"C","is_link":true}]}"#),
            Err(ParseError::UnknownEndpoint { line: 1, .. })
        ));
        assert!(matches!(parse_grid_json("{"), Err(ParseError::Json { .. })));
    }

    #[test]
    fn synthetic_grid_examples() {
        let spec = SyntheticSpec::new(10, 9, WeightDist::Constant(1.0), 7);
        let g = generate_synthetic_grid(&spec).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.size(), 9);
        assert!(g.edges().iter().all(|e| e.weight == 1.0));
        let again = generate_synthetic_grid(&spec).unwrap();
        assert_eq!(g.edges(), again.edges());
        let bad = SyntheticSpec::new(5, 3, WeightDist::Constant(1.0), 7);
        assert!(matches!(generate_synthetic_grid(&bad), Err(GridError::Infeasible(_))));
    }

    #[test]
    fn uniform_weights_in_range() {
        let mut spec = SyntheticSpec::new(50, 60, WeightDist::Uniform(0.2, 3.0), 1);
        spec.current_dist = Some(WeightDist::Uniform(100.0, 400.0));
        let g = generate_synthetic_grid(&spec).unwrap();
        assert!(g.edges().iter().all(|e| (0.2..3.0).contains(&e.weight)));
        assert!(g.edges().iter().all(|e| e.max_current.is_some()));
    }
}
