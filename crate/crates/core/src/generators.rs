//! Protocol graph constructions: the full binary tree, the Poulidor ring and
//! the generalized trees used by the probability recursion.
//!
//! The Poulidor adjacency `q_i -> q_(i+1 mod 2n)`, `q_i -> q_(i+2 mod 2n)` is a
//! transcription of the published four-round drawing, whose top vertex is
//! `q_0` and whose remaining vertices are numbered clockwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Alphabet, GraphBuilder, Label, LabeledDigraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("rounds must be at least {min}, got {got}")]
    TooFewRounds { min: u32, got: u32 },
    #[error("explicit labeling has {got} entries, graph has {expected} vertices")]
    LabelingLength { expected: usize, got: usize },
    #[error("explicit label {0} is not a bit")]
    NonBinaryLabel(u8),
    #[error("graph with {0} rounds is too large to build")]
    TooLarge(u32),
}

/// How vertex labels are assigned when a graph is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Labeling {
    /// Every vertex labelled 0; use when only the structure matters.
    Unlabeled,
    /// One uniform bit per vertex in id order from `ChaCha8Rng::seed_from_u64`.
    Seeded(u64),
    /// Bits in vertex id order.
    Explicit(Vec<u8>),
}

impl Labeling {
    fn resolve(&self, count: usize) -> Result<Vec<Label>, GeneratorError> {
        match self {
            Labeling::Unlabeled => Ok(vec![Label::ZERO; count]),
            Labeling::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..count).map(|_| Label::bit(rng.gen())).collect())
            }
            Labeling::Explicit(bits) => {
                if bits.len() != count {
                    return Err(GeneratorError::LabelingLength { expected: count, got: bits.len() });
                }
                bits.iter()
                    .map(|&b| if b <= 1 { Ok(Label(b as u16)) } else { Err(GeneratorError::NonBinaryLabel(b)) })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeSpec {
    pub rounds: u32,
}

impl TreeSpec {
    pub fn vertex_count(&self) -> usize {
        (1usize << (self.rounds + 1)) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoulidorSpec {
    pub rounds: u32,
}

/// `T^m_n`: a root with `2m` children, each rooting a full binary tree of
/// depth `n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneralizedTreeSpec {
    pub m: u32,
    pub n: u32,
}

impl GeneralizedTreeSpec {
    pub fn vertex_count(&self) -> usize {
        1 + 2 * self.m as usize * ((1usize << self.n) - 1)
    }
}

const MAX_TREE_ROUNDS: u32 = 24;

/// Full binary tree of depth `n`, numbered breadth-first from the root
/// (`children(v) = 2v+1, 2v+2`). The first child edge carries challenge 0.
pub fn make_tree(spec: TreeSpec, labeling: &Labeling) -> Result<LabeledDigraph, GeneratorError> {
    if spec.rounds < 1 {
        return Err(GeneratorError::TooFewRounds { min: 1, got: spec.rounds });
    }
    make_generalized_tree(GeneralizedTreeSpec { m: 1, n: spec.rounds }, labeling)
}

/// Poulidor graph with `2n` vertices; vertex 0 is the start. The edge to
/// `i+1` carries challenge 0, the edge to `i+2` challenge 1.
pub fn make_poulidor(spec: PoulidorSpec, labeling: &Labeling) -> Result<LabeledDigraph, GeneratorError> {
    if spec.rounds < 2 {
        return Err(GeneratorError::TooFewRounds { min: 2, got: spec.rounds });
    }
    let count = 2 * spec.rounds as usize;
    let labels = labeling.resolve(count)?;
    let mut b = GraphBuilder::new(Alphabet::binary());
    for l in labels {
        b.add_vertex(l);
    }
    for i in 0..count {
        b.add_edge(i, (i + 1) % count, Some(0));
        b.add_edge(i, (i + 2) % count, Some(1));
    }
    Ok(b.build().expect("poulidor construction is well formed"))
}

/// Breadth-first numbered `T^m_n`. Edge labels are assigned only where the
/// out-degree is 2, so `m = 1` reproduces [`make_tree`] exactly.
pub fn make_generalized_tree(spec: GeneralizedTreeSpec, labeling: &Labeling) -> Result<LabeledDigraph, GeneratorError> {
    if spec.n < 1 {
        return Err(GeneratorError::TooFewRounds { min: 1, got: spec.n });
    }
    if spec.n > MAX_TREE_ROUNDS {
        return Err(GeneratorError::TooLarge(spec.n));
    }
    let count = spec.vertex_count();
    let labels = labeling.resolve(count)?;
    let mut b = GraphBuilder::new(Alphabet::binary());
    for l in labels {
        b.add_vertex(l);
    }
    if spec.m > 0 {
        let root_children = 2 * spec.m as usize;
        let labelled = root_children == 2;
        for c in 0..root_children {
            b.add_edge(0, 1 + c, labelled.then_some(c as u8));
        }
        // Vertices below the root: level d (1-based) starts at 1 + 2m(2^(d-1) - 1).
        let mut next = 1 + root_children;
        let internal_end = 1 + root_children * ((1usize << (spec.n - 1)) - 1);
        for v in 1..internal_end {
            b.add_edge(v, next, Some(0));
            b.add_edge(v, next + 1, Some(1));
            next += 2;
        }
        debug_assert_eq!(next, count);
    }
    Ok(b.build().expect("tree construction is well formed"))
}
