//! JSON graph files:
//!
//! ```json
//! {"alphabet": ["0","1"],
//!  "vertices": [{"id": 0, "label": "0", "name": "root"}],
//!  "edges": [{"from": 0, "to": 1, "edge_label": "0"}]}
//! ```
//!
//! `name` and `edge_label` are optional, ids must be `0..n-1`. Unknown
//! top-level keys (e.g. a `roles` table) are preserved in
//! [`GraphDocument::extra`].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Alphabet, GraphBuilder, GraphError, LabeledDigraph, VertexId};

#[derive(Debug, Error)]
pub enum GraphIoError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed graph JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    alphabet: Vec<String>,
    vertices: Vec<VertexJson>,
    edges: Vec<EdgeJson>,
    #[serde(flatten)]
    extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct VertexJson {
    id: usize,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeJson {
    from: usize,
    to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge_label: Option<String>,
}

/// A graph plus the optional metadata carried by the file format.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDocument {
    pub graph: LabeledDigraph,
    pub names: BTreeMap<VertexId, String>,
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl GraphDocument {
    pub fn new(graph: LabeledDigraph) -> Self {
        GraphDocument { graph, names: BTreeMap::new(), extra: serde_json::Map::new() }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let g = &self.graph;
        let vertices = (0..g.vertex_count())
            .map(|v| VertexJson {
                id: v,
                label: g.alphabet().symbol(g.label(v)).to_string(),
                name: self.names.get(&v).cloned(),
            })
            .collect();
        let edges = (0..g.vertex_count())
            .flat_map(|v| {
                g.out_edges(v).iter().map(move |e| EdgeJson {
                    from: v,
                    to: e.target,
                    edge_label: e.label.map(|b| b.to_string()),
                })
            })
            .collect();
        let doc = GraphJson { alphabet: g.alphabet().symbols().to_vec(), vertices, edges, extra: self.extra.clone() };
        serde_json::to_value(doc).expect("graph JSON is always serialisable")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serialisable")
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> GraphIoError {
    GraphIoError::Invalid { field: field.into(), message: message.into() }
}

pub fn parse_graph_json(text: &str) -> Result<GraphDocument, GraphIoError> {
    let raw: GraphJson = serde_json::from_str(text).map_err(|e| GraphIoError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let alphabet = Alphabet::new(raw.alphabet).map_err(|e| invalid("alphabet", e.to_string()))?;
    let n = raw.vertices.len();
    let mut labels = vec![None; n];
    let mut names = BTreeMap::new();
    for (i, v) in raw.vertices.iter().enumerate() {
        if v.id >= n {
            return Err(invalid(format!("vertices[{i}].id"), format!("id {} outside 0..{}", v.id, n)));
        }
        if labels[v.id].is_some() {
            return Err(invalid(format!("vertices[{i}].id"), format!("duplicate id {}", v.id)));
        }
        let label = alphabet.lookup(&v.label).map_err(|e| invalid(format!("vertices[{i}].label"), e.to_string()))?;
        labels[v.id] = Some(label);
        if let Some(name) = &v.name {
            names.insert(v.id, name.clone());
        }
    }
    let mut b = GraphBuilder::new(alphabet);
    for l in labels {
        b.add_vertex(l.expect("ids are a permutation of 0..n"));
    }
    for (i, e) in raw.edges.iter().enumerate() {
        for (end, v) in [("from", e.from), ("to", e.to)] {
            if v >= n {
                return Err(invalid(format!("edges[{i}].{end}"), format!("dangling vertex {v} ({n} vertices)")));
            }
        }
        let label = match e.edge_label.as_deref() {
            None => None,
            Some("0") => Some(0),
            Some("1") => Some(1),
            Some(other) => return Err(invalid(format!("edges[{i}].edge_label"), format!("{other:?} is not 0 or 1"))),
        };
        b.add_edge(e.from, e.to, label);
    }
    let graph = b.build().map_err(|e| match e {
        GraphError::DuplicateEdgeLabel { vertex, .. } => invalid("edges", format!("vertex {vertex}: {e}")),
        other => invalid("graph", other.to_string()),
    })?;
    Ok(GraphDocument { graph, names, extra: raw.extra })
}

pub fn read_graph_document(path: impl AsRef<Path>) -> Result<GraphDocument, GraphIoError> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|source| GraphIoError::Io { path: path.display().to_string(), source })?;
    parse_graph_json(&text)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<LabeledDigraph, GraphIoError> {
    read_graph_document(path).map(|d| d.graph)
}

pub fn write_graph_document(doc: &GraphDocument, path: impl AsRef<Path>) -> Result<(), GraphIoError> {
    let path = path.as_ref();
    fs::write(path, doc.to_json_string() + "\n")
        .map_err(|source| GraphIoError::Io { path: path.display().to_string(), source })
}

pub fn write_graph(g: &LabeledDigraph, path: impl AsRef<Path>) -> Result<(), GraphIoError> {
    write_graph_document(&GraphDocument::new(g.clone()), path)
}
