//! Weighted power-grid graph.
//!
//! Nodes are substations, transformers or consumers; edges are cables whose
//! weight is the cable resistance in Ohm (resistance per km times length).
//! Short zero-resistance connections ("links") carry [`LINK_WEIGHT`].
//!
//! Parallel cables are kept in the edge list. Path and matrix metrics read the
//! collapsed simple adjacency exposed by [`GridGraph::neighbors`], where each
//! neighbour pair keeps its minimum weight.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};

/// Conventional weight of a link edge, in Ohm.
pub const LINK_WEIGHT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Substation,
    Transformer,
    Consumer,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Substation => "substation",
            NodeKind::Transformer => "transformer",
            NodeKind::Consumer => "consumer",
        }
    }
}

impl std::str::FromStr for NodeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "substation" => Ok(NodeKind::Substation),
            "transformer" => Ok(NodeKind::Transformer),
            "consumer" => Ok(NodeKind::Consumer),
            other => Err(format!("unknown node kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub kind: NodeKind,
}

impl NodeRecord {
    pub fn new(id: impl Into<String>, kind: NodeKind) -> Self {
        NodeRecord {
            id: id.into(),
            kind,
        }
    }
}

/// One cable as described in a grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub resistance_ohm_per_km: Option<f64>,
    #[serde(default)]
    pub length_km: Option<f64>,
    #[serde(default, with = "bool_or_int")]
    pub is_link: bool,
    #[serde(default)]
    pub max_current_a: Option<f64>,
}

impl EdgeRecord {
    pub fn cable(from: impl Into<String>, to: impl Into<String>, ohm_per_km: f64, km: f64) -> Self {
        EdgeRecord {
            from: from.into(),
            to: to.into(),
            resistance_ohm_per_km: Some(ohm_per_km),
            length_km: Some(km),
            is_link: false,
            max_current_a: None,
        }
    }

    pub fn link(from: impl Into<String>, to: impl Into<String>) -> Self {
        EdgeRecord {
            from: from.into(),
            to: to.into(),
            resistance_ohm_per_km: None,
            length_km: None,
            is_link: true,
            max_current_a: None,
        }
    }

    pub fn with_current(mut self, amps: f64) -> Self {
        self.max_current_a = Some(amps);
        self
    }
}

/// JSON grid files may write `is_link` as `true`/`false` or `0`/`1`.
mod bool_or_int {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_bool(*v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            B(bool),
            I(u8),
        }
        match Raw::deserialize(d)? {
            Raw::B(b) => Ok(b),
            Raw::I(0) => Ok(false),
            Raw::I(1) => Ok(true),
            Raw::I(n) => Err(serde::de::Error::custom(format!("is_link must be 0 or 1, got {n}"))),
        }
    }
}

/// An edge of a constructed graph, endpoints as dense node indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridEdge {
    pub a: usize,
    pub b: usize,
    /// Resistance in Ohm.
    pub weight: f64,
    pub max_current: Option<f64>,
    pub is_link: bool,
}

/// Immutable undirected (multi)graph of a power grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGraph {
    nodes: Vec<NodeRecord>,
    edges: Vec<GridEdge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl GridGraph {
    /// Builds a graph from already-validated parts. Edge weights must be positive.
    pub fn from_parts(nodes: Vec<NodeRecord>, edges: Vec<GridEdge>) -> Result<Self> {
        let n = nodes.len();
        for e in &edges {
            if e.a >= n {
                return Err(GridError::UnknownVertex(e.a));
            }
            if e.b >= n {
                return Err(GridError::UnknownVertex(e.b));
            }
            if e.a == e.b {
                return Err(GridError::SelfLoop(nodes[e.a].id.clone()));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(GridError::InvalidWeight {
                    from: nodes[e.a].id.clone(),
                    to: nodes[e.b].id.clone(),
                    field: "weight",
                    value: e.weight,
                });
            }
        }
        let adjacency = collapse(n, &edges);
        Ok(GridGraph {
            nodes,
            edges,
            adjacency,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Number of edges, parallel cables included.
    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &NodeRecord {
        &self.nodes[v]
    }

    pub fn edges(&self) -> &[GridEdge] {
        &self.edges
    }

    /// Simple-graph neighbours of `v` in ascending index order, with the
    /// minimum weight over parallel edges.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    /// Number of distinct neighbours.
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Mean weight over all edges (parallel cables counted individually).
    pub fn edge_mean_weight(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges.iter().map(|e| e.weight).sum::<f64>() / self.edges.len() as f64
    }

    /// Same topology with each edge weight replaced by `f(edge)`. Edges for
    /// which `f` returns `None` are reported in the error.
    pub fn reweighted<F>(&self, f: F) -> std::result::Result<GridGraph, Vec<usize>>
    where
        F: Fn(&GridEdge) -> Option<f64>,
    {
        let mut missing = Vec::new();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            match f(e) {
                Some(w) if w.is_finite() && w > 0.0 => edges.push(GridEdge { weight: w, ..*e }),
                _ => missing.push(i),
            }
        }
        if !missing.is_empty() {
            return Err(missing);
        }
        let adjacency = collapse(self.nodes.len(), &edges);
        Ok(GridGraph {
            nodes: self.nodes.clone(),
            edges,
            adjacency,
        })
    }

    /// Component label per node and the number of components.
    pub fn component_labels(&self) -> (usize, Vec<usize>) {
        let n = self.order();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(w, _) in &self.adjacency[u] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    pub fn is_connected(&self) -> bool {
        self.component_labels().0 <= 1
    }

    pub(crate) fn require_connected(&self, min_order: usize) -> Result<()> {
        if self.is_empty() && min_order > 0 {
            return Err(GridError::EmptyGraph);
        }
        if self.order() < min_order {
            return Err(GridError::TooSmall {
                order: self.order(),
                required: min_order,
            });
        }
        let (components, _) = self.component_labels();
        if components > 1 {
            return Err(GridError::Disconnected { components });
        }
        Ok(())
    }

    /// Subgraph induced by `keep` (indices into this graph). Node order in
    /// the result follows ascending parent index.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Component {
        let mut original: Vec<usize> = keep.to_vec();
        original.sort_unstable();
        original.dedup();
        let mut map = vec![usize::MAX; self.order()];
        for (new, &old) in original.iter().enumerate() {
            map[old] = new;
        }
        let nodes = original.iter().map(|&i| self.nodes[i].clone()).collect();
        let edges: Vec<GridEdge> = self
            .edges
            .iter()
            .filter(|e| map[e.a] != usize::MAX && map[e.b] != usize::MAX)
            .map(|e| GridEdge {
                a: map[e.a],
                b: map[e.b],
                ..*e
            })
            .collect();
        let adjacency = collapse(original.len(), &edges);
        Component {
            graph: GridGraph {
                nodes,
                edges,
                adjacency,
            },
            original,
        }
    }
}

fn collapse(n: usize, edges: &[GridEdge]) -> Vec<Vec<(usize, f64)>> {
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in edges {
        adjacency[e.a].push((e.b, e.weight));
        adjacency[e.b].push((e.a, e.weight));
    }
    for list in &mut adjacency {
        list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        list.dedup_by_key(|x| x.0);
    }
    adjacency
}

/// A connected piece of a larger graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub graph: GridGraph,
    /// `original[i]` is the index in the parent graph of node `i`.
    pub original: Vec<usize>,
}

/// Validates records and builds the weighted graph. Cable weight is
/// resistance per km times length; links get [`LINK_WEIGHT`].
pub fn build_graph(nodes: Vec<NodeRecord>, edges: Vec<EdgeRecord>) -> Result<GridGraph> {
    let mut index: HashMap<&str, usize> = HashMap::with_capacity(nodes.len());
    for (i, n) in nodes.iter().enumerate() {
        if index.insert(n.id.as_str(), i).is_some() {
            return Err(GridError::DuplicateNode(n.id.clone()));
        }
    }
    let mut built = Vec::with_capacity(edges.len());
    for e in &edges {
        let a = *index
            .get(e.from.as_str())
            .ok_or_else(|| GridError::UnknownEndpoint(e.from.clone()))?;
        let b = *index
            .get(e.to.as_str())
            .ok_or_else(|| GridError::UnknownEndpoint(e.to.clone()))?;
        if a == b {
            return Err(GridError::SelfLoop(e.from.clone()));
        }
        let weight = edge_weight(e)?;
        if let Some(c) = e.max_current_a {
            if !(c.is_finite() && c > 0.0) {
                return Err(invalid(e, "max_current_a", c));
            }
        }
        built.push(GridEdge {
            a,
            b,
            weight,
            max_current: e.max_current_a,
            is_link: e.is_link,
        });
    }
    drop(index);
    GridGraph::from_parts(nodes, built)
}

fn invalid(e: &EdgeRecord, field: &'static str, value: f64) -> GridError {
    GridError::InvalidWeight {
        from: e.from.clone(),
        to: e.to.clone(),
        field,
        value,
    }
}

fn edge_weight(e: &EdgeRecord) -> Result<f64> {
    if e.is_link {
        return Ok(LINK_WEIGHT);
    }
    let r = e.resistance_ohm_per_km.ok_or_else(|| GridError::MissingResistance {
        from: e.from.clone(),
        to: e.to.clone(),
        field: "resistance_ohm_per_km",
    })?;
    let len = e.length_km.ok_or_else(|| GridError::MissingResistance {
        from: e.from.clone(),
        to: e.to.clone(),
        field: "length_km",
    })?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid(e, "resistance_ohm_per_km", r));
    }
    if !(len.is_finite() && len >= 0.0) {
        return Err(invalid(e, "length_km", len));
    }
    let w = r * len;
    // Cables must carry positive resistance; zero-resistance ties are links.
    if w <= 0.0 {
        return Err(invalid(e, "weight", w));
    }
    Ok(w)
}

/// Splits `g` into maximal connected subgraphs, largest first; ties go to the
/// component holding the smallest original node index.
pub fn connected_components(g: &GridGraph) -> Vec<Component> {
    let (count, label) = g.component_labels();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (v, &c) in label.iter().enumerate() {
        members[c].push(v);
    }
    // labels are assigned in order of first (smallest) member
    members.sort_by(|x, y| y.len().cmp(&x.len()).then(x[0].cmp(&y[0])));
    members.iter().map(|m| g.induced_subgraph(m)).collect()
}

/// Order N, size M and average degree 2M/N.
pub fn order_size_avg_degree(g: &GridGraph) -> Result<(usize, usize, f64)> {
    if g.is_empty() {
        return Err(GridError::EmptyGraph);
    }
    Ok((g.order(), g.size(), avg_degree(g.order(), g.size())))
}

pub fn avg_degree(order: usize, size: usize) -> f64 {
    2.0 * size as f64 / order as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(id: &str) -> NodeRecord {
        NodeRecord::new(id, NodeKind::Substation)
    }

    #[test]
    fn cable_weight_is_product() {
        let g = build_graph(vec![n("A"), n("B")], vec![EdgeRecord::cable("A", "B", 0.5, 2.0)]).unwrap();
        assert_eq!(g.edges()[0].weight, 1.0);
    }

    #[test]
    fn link_gets_conventional_weight() {
        let g = build_graph(vec![n("A"), n("B")], vec![EdgeRecord::link("A", "B")]).unwrap();
        assert_eq!(g.edges()[0].weight, 1e-9);
        assert!(g.edges()[0].is_link);
    }

    #[test]
    fn three_node_weights() {
        let g = build_graph(
            vec![n("A"), n("B"), n("C")],
            vec![EdgeRecord::cable("A", "B", 1.0, 1.0), EdgeRecord::cable("B", "C", 2.0, 3.0)],
        )
        .unwrap();
        let w: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![1.0, 6.0]);
        assert_eq!(g.neighbors(1), &[(0, 1.0), (2, 6.0)]);
    }

    #[test]
    fn construction_errors() {
        let err = build_graph(vec![n("A")], vec![EdgeRecord::cable("A", "Z", 1.0, 1.0)]).unwrap_err();
        assert_eq!(err, GridError::UnknownEndpoint("Z".into()));
        let err = build_graph(vec![n("A")], vec![EdgeRecord::cable("A", "A", 1.0, 1.0)]).unwrap_err();
        assert_eq!(err, GridError::SelfLoop("A".into()));
        let err = build_graph(vec![n("A"), n("B")], vec![EdgeRecord::cable("A", "B", -1.0, 1.0)]).unwrap_err();
        assert!(matches!(err, GridError::InvalidWeight { field: "resistance_ohm_per_km", .. }));
        let err = build_graph(vec![n("A"), n("B")], vec![EdgeRecord::cable("A", "B", 1.0, -2.0)]).unwrap_err();
        assert!(matches!(err, GridError::InvalidWeight { field: "length_km", .. }));
        let mut e = EdgeRecord::cable("A", "B", 1.0, 1.0);
        e.length_km = None;
        let err = build_graph(vec![n("A"), n("B")], vec![e]).unwrap_err();
        assert!(matches!(err, GridError::MissingResistance { field: "length_km", .. }));
        let err = build_graph(vec![n("A"), n("A")], vec![]).unwrap_err();
        assert_eq!(err, GridError::DuplicateNode("A".into()));
    }

    #[test]
    fn parallel_edges_collapse_to_min() {
        let g = build_graph(
            vec![n("A"), n("B")],
            vec![EdgeRecord::cable("A", "B", 1.0, 3.0), EdgeRecord::cable("A", "B", 1.0, 2.0)],
        )
        .unwrap();
        assert_eq!(g.size(), 2);
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.neighbors(0), &[(1, 2.0)]);
    }

    #[test]
    fn components_path_plus_isolated() {
        let g = build_graph(vec![n("A"), n("B"), n("C")], vec![EdgeRecord::cable("A", "B", 1.0, 1.0)]).unwrap();
        let comps = connected_components(&g);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].graph.order(), 2);
        assert_eq!(comps[1].graph.order(), 1);
        assert_eq!(comps[1].original, vec![2]);
    }

    #[test]
    fn components_cycle_identity() {
        let ids = ["A", "B", "C", "D", "E"];
        let nodes = ids.iter().map(|i| n(i)).collect();
        let edges = (0..5)
            .map(|i| EdgeRecord::cable(ids[i], ids[(i + 1) % 5], 1.0, 1.0))
            .collect();
        let g = build_graph(nodes, edges).unwrap();
        let comps = connected_components(&g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].graph, g);
    }

    #[test]
    fn components_two_triangles() {
        let ids = ["A", "B", "C", "D", "E", "F"];
        let nodes = ids.iter().map(|i| n(i)).collect();
        let edges = vec![
            EdgeRecord::cable("D", "E", 1.0, 1.0),
            EdgeRecord::cable("E", "F", 1.0, 1.0),
            EdgeRecord::cable("F", "D", 1.0, 1.0),
            EdgeRecord::cable("A", "B", 1.0, 1.0),
            EdgeRecord::cable("B", "C", 1.0, 1.0),
            EdgeRecord::cable("C", "A", 1.0, 1.0),
        ];
        let g = build_graph(nodes, edges).unwrap();
        let comps = connected_components(&g);
        assert_eq!(comps.len(), 2);
        for c in &comps {
            assert_eq!((c.graph.order(), c.graph.size()), (3, 3));
        }
        assert_eq!(comps[0].original, vec![0, 1, 2]);
    }

    #[test]
    fn empty_graph_has_no_components() {
        let g = build_graph(vec![], vec![]).unwrap();
        assert!(connected_components(&g).is_empty());
        assert_eq!(order_size_avg_degree(&g).unwrap_err(), GridError::EmptyGraph);
    }

    #[test]
    fn average_degree_examples() {
        assert!((avg_degree(17, 18) - 2.118).abs() < 1e-3);
        assert!((avg_degree(884, 1059) - 2.396).abs() < 1e-3);
        let g = build_graph(vec![n("A"), n("B")], vec![EdgeRecord::cable("A", "B", 1.0, 1.0)]).unwrap();
        assert_eq!(order_size_avg_degree(&g).unwrap(), (2, 1, 1.0));
    }

    #[test]
    fn json_is_link_accepts_int() {
        let e: EdgeRecord = serde_json::from_str(r#"{"from":"A","to":"B","is_link":1}"#).unwrap();
        assert!(e.is_link);
        let e: EdgeRecord = serde_json::from_str(r#"{"from":"A","to":"B","is_link":false,"resistance_ohm_per_km":1,"length_km":2}"#).unwrap();
        assert!(!e.is_link);
    }
}
