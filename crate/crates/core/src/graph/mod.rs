//! Vertex-labeled digraphs, walk counting and the most-frequent-sequence solver.
//!
//! Vertices are dense indices `0..n`. Each vertex carries a [`Label`], an index
//! into the graph's [`Alphabet`]. Out-edges keep their insertion order and may
//! carry a binary edge label (the challenge bit that selects them).

mod io;
mod labeling;
mod walks;

use std::fmt;

use thiserror::Error;

pub use io::{
    parse_graph_json, read_graph, read_graph_document, write_graph, write_graph_document, GraphDocument, GraphIoError,
};
pub use labeling::{complementary_sibling_labeling, LabelingError};
pub use walks::{
    enumerate_walk_sequences, most_frequent_sequence, occ_count, walk_count, Limits, MfsMode, MfsResult,
    SequenceMultiset,
};

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range (graph has {count} vertices)")]
    VertexOutOfRange { vertex: VertexId, count: usize },
    #[error("label index {label} outside alphabet of size {size}")]
    LabelOutOfAlphabet { label: u16, size: usize },
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),
    #[error("alphabet must be non-empty with distinct symbols")]
    BadAlphabet,
    #[error("vertex {vertex} has two out-edges labeled {label}")]
    DuplicateEdgeLabel { vertex: VertexId, label: u8 },
    #[error("edge label {0} is not binary")]
    NonBinaryEdgeLabel(u8),
    #[error("labeling has {got} entries, graph has {expected} vertices")]
    LabelingLength { expected: usize, got: usize },
    #[error("sequence length must be at least 1")]
    EmptySequence,
    #[error("{what} limit exceeded: {needed} > {limit}")]
    LimitExceeded { what: &'static str, needed: u128, limit: u64 },
    #[error("walk count overflowed 128 bits")]
    CountOverflow,
}

/// A vertex label: index into the graph's alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u16);

impl Label {
    pub const ZERO: Label = Label(0);
    pub const ONE: Label = Label(1);

    pub fn bit(bit: bool) -> Label {
        Label(bit as u16)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered finite alphabet; symbol order is the tie-break order for MFS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Result<Self, GraphError> {
        if symbols.is_empty() || symbols.len() > u16::MAX as usize {
            return Err(GraphError::BadAlphabet);
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || symbols[..i].contains(s) {
                return Err(GraphError::BadAlphabet);
            }
        }
        Ok(Alphabet { symbols })
    }

    pub fn binary() -> Self {
        Alphabet { symbols: vec!["0".into(), "1".into()] }
    }

    pub fn is_binary(&self) -> bool {
        self.symbols.len() == 2 && self.symbols[0] == "0" && self.symbols[1] == "1"
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, label: Label) -> &str {
        &self.symbols[label.index()]
    }

    pub fn lookup(&self, symbol: &str) -> Result<Label, GraphError> {
        self.symbols
            .iter()
            .position(|s| s == symbol)
            .map(|i| Label(i as u16))
            .ok_or_else(|| GraphError::UnknownSymbol(symbol.to_string()))
    }

    fn single_char(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub target: VertexId,
    pub label: Option<u8>,
}

/// An immutable vertex-labeled digraph with optional binary edge labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDigraph {
    alphabet: Alphabet,
    labels: Vec<Label>,
    out: Vec<Vec<Edge>>,
}

impl LabeledDigraph {
    /// Binary graph from a label bit per vertex and an unlabeled edge list.
    pub fn binary(labels: &[u8], edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new(Alphabet::binary());
        for &l in labels {
            b.add_vertex(Label(l as u16));
        }
        for &(from, to) in edges {
            b.add_edge(from, to, None);
        }
        b.build()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn label(&self, v: VertexId) -> Label {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn out_edges(&self, v: VertexId) -> &[Edge] {
        &self.out[v]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out[v].len()
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn successors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out[v].iter().map(|e| e.target)
    }

    /// Out-neighbour reached by challenge bit `bit`, if any.
    pub fn follow(&self, v: VertexId, bit: u8) -> Option<VertexId> {
        self.out[v].iter().find(|e| e.label == Some(bit)).map(|e| e.target)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, count: self.vertex_count() })
        }
    }

    /// Same structure, new vertex labels.
    pub fn relabeled(&self, labels: Vec<Label>) -> Result<Self, GraphError> {
        if labels.len() != self.vertex_count() {
            return Err(GraphError::LabelingLength { expected: self.vertex_count(), got: labels.len() });
        }
        check_labels(&self.alphabet, &labels)?;
        Ok(LabeledDigraph { alphabet: self.alphabet.clone(), labels, out: self.out.clone() })
    }

    /// Same structure and vertex labels, new per-edge labels in out-edge order.
    pub fn with_edge_labels(&self, labels: &[Vec<Option<u8>>]) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new(self.alphabet.clone());
        for &l in &self.labels {
            b.add_vertex(l);
        }
        for (v, edges) in self.out.iter().enumerate() {
            for (i, e) in edges.iter().enumerate() {
                let label = labels.get(v).and_then(|ls| ls.get(i)).copied().flatten();
                b.add_edge(v, e.target, label);
            }
        }
        b.build()
    }
}

fn check_labels(alphabet: &Alphabet, labels: &[Label]) -> Result<(), GraphError> {
    match labels.iter().find(|l| l.index() >= alphabet.len()) {
        Some(l) => Err(GraphError::LabelOutOfAlphabet { label: l.0, size: alphabet.len() }),
        None => Ok(()),
    }
}

/// Accumulates vertices and edges; [`GraphBuilder::build`] checks invariants.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    alphabet: Alphabet,
    labels: Vec<Label>,
    edges: Vec<(VertexId, VertexId, Option<u8>)>,
}

impl GraphBuilder {
    pub fn new(alphabet: Alphabet) -> Self {
        GraphBuilder { alphabet, labels: Vec::new(), edges: Vec::new() }
    }

    pub fn add_vertex(&mut self, label: Label) -> VertexId {
        self.labels.push(label);
        self.labels.len() - 1
    }

    pub fn set_label(&mut self, v: VertexId, label: Label) {
        self.labels[v] = label;
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn add_edge(&mut self, from: VertexId, to: VertexId, label: Option<u8>) {
        self.edges.push((from, to, label));
    }

    /// Adds the edge unless an identical (from, to) edge already exists.
    pub fn add_edge_once(&mut self, from: VertexId, to: VertexId) {
        if !self.edges.iter().any(|&(f, t, _)| f == from && t == to) {
            self.edges.push((from, to, None));
        }
    }

    pub fn build(self) -> Result<LabeledDigraph, GraphError> {
        check_labels(&self.alphabet, &self.labels)?;
        let count = self.labels.len();
        let mut out = vec![Vec::new(); count];
        for (from, to, label) in self.edges {
            for v in [from, to] {
                if v >= count {
                    return Err(GraphError::VertexOutOfRange { vertex: v, count });
                }
            }
            if let Some(bit) = label {
                if bit > 1 {
                    return Err(GraphError::NonBinaryEdgeLabel(bit));
                }
                if out[from].iter().any(|e: &Edge| e.label == Some(bit)) {
                    return Err(GraphError::DuplicateEdgeLabel { vertex: from, label: bit });
                }
            }
            out[from].push(Edge { target: to, label });
        }
        Ok(LabeledDigraph { alphabet: self.alphabet, labels: self.labels, out })
    }
}

/// Non-empty sequence of labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelSequence(Vec<Label>);

impl LabelSequence {
    pub fn new(symbols: Vec<Label>) -> Result<Self, GraphError> {
        if symbols.is_empty() {
            return Err(GraphError::EmptySequence);
        }
        Ok(LabelSequence(symbols))
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, GraphError> {
        Self::new(bits.iter().map(|&b| Label(b as u16)).collect())
    }

    /// Parses `"0010"` for single-character alphabets, whitespace-separated
    /// symbols otherwise.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Self, GraphError> {
        let symbols: Result<Vec<Label>, GraphError> = if alphabet.single_char() && !text.contains(char::is_whitespace) {
            text.chars().map(|c| alphabet.lookup(c.encode_utf8(&mut [0; 4]))).collect()
        } else {
            text.split_whitespace().map(|s| alphabet.lookup(s)).collect()
        };
        Self::new(symbols?)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Label] {
        &self.0
    }

    pub fn bits(&self) -> Vec<u8> {
        self.0.iter().map(|l| l.0 as u8).collect()
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let parts: Vec<&str> = self.0.iter().map(|&l| alphabet.symbol(l)).collect();
        if alphabet.single_char() {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Display for LabelSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.0)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Alphabet differs from `{0, 1}`.
    Alphabet(Vec<String>),
    OutDegree {
        vertex: VertexId,
        degree: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Alphabet(symbols) => write!(f, "alphabet {symbols:?} is not {{0,1}}"),
            Violation::OutDegree { vertex, degree } => write!(f, "vertex {vertex} has out-degree {degree} > 2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BinaryVerdict {
    pub violations: Vec<Violation>,
}

impl BinaryVerdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the Binary MFS restrictions: alphabet `{0,1}`, out-degree at most 2.
pub fn validate_binary_instance(g: &LabeledDigraph) -> BinaryVerdict {
    let mut violations = Vec::new();
    if !g.alphabet().is_binary() {
        violations.push(Violation::Alphabet(g.alphabet().symbols().to_vec()));
    }
    for v in 0..g.vertex_count() {
        let degree = g.out_degree(v);
        if degree > 2 {
            violations.push(Violation::OutDegree { vertex: v, degree });
        }
    }
    BinaryVerdict { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_is_binary_instance() {
        let g = LabeledDigraph::binary(&[0], &[]).unwrap();
        assert!(validate_binary_instance(&g).is_ok());
    }

    #[test]
    fn out_degree_three_is_named() {
        let g = LabeledDigraph::binary(&[0, 1, 1, 0], &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let verdict = validate_binary_instance(&g);
        assert_eq!(verdict.violations, vec![Violation::OutDegree { vertex: 0, degree: 3 }]);
    }

    #[test]
    fn ternary_alphabet_is_flagged() {
        let alphabet = Alphabet::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let mut b = GraphBuilder::new(alphabet);
        b.add_vertex(Label(2));
        let g = b.build().unwrap();
        assert!(matches!(validate_binary_instance(&g).violations[..], [Violation::Alphabet(_)]));
    }

    #[test]
    fn builder_rejects_dangling_and_duplicate_edge_labels() {
        let mut b = GraphBuilder::new(Alphabet::binary());
        b.add_vertex(Label::ZERO);
        b.add_edge(0, 3, None);
        assert_eq!(b.build(), Err(GraphError::VertexOutOfRange { vertex: 3, count: 1 }));

        let mut b = GraphBuilder::new(Alphabet::binary());
        for _ in 0..3 {
            b.add_vertex(Label::ZERO);
        }
        b.add_edge(0, 1, Some(0));
        b.add_edge(0, 2, Some(0));
        assert_eq!(b.build(), Err(GraphError::DuplicateEdgeLabel { vertex: 0, label: 0 }));
    }

    #[test]
    fn sequence_parsing() {
        let bin = Alphabet::binary();
        let s = LabelSequence::parse(&bin, "0010").unwrap();
        assert_eq!(s.bits(), vec![0, 0, 1, 0]);
        assert_eq!(s.render(&bin), "0010");
        assert!(LabelSequence::parse(&bin, "012").is_err());
        assert_eq!(LabelSequence::parse(&bin, ""), Err(GraphError::EmptySequence));

        let words = Alphabet::new(vec!["lo".into(), "hi".into()]).unwrap();
        let s = LabelSequence::parse(&words, "hi lo hi").unwrap();
        assert_eq!(s.bits(), vec![1, 0, 1]);
        assert_eq!(s.render(&words), "hi lo hi");
    }

    #[test]
    fn follow_uses_edge_labels() {
        let g = LabeledDigraph::binary(&[0, 1, 0], &[(0, 1), (0, 2)])
            .unwrap()
            .with_edge_labels(&[vec![Some(1), Some(0)]])
            .unwrap();
        assert_eq!(g.follow(0, 0), Some(2));
        assert_eq!(g.follow(0, 1), Some(1));
        assert_eq!(g.follow(1, 0), None);
    }
}
