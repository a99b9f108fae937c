use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Label, LabeledDigraph, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelingError {
    #[error("complementary labeling needs the binary alphabet")]
    NotBinary,
    #[error("vertex {vertex} cannot be complementary to all its siblings (constraint from parent {parent})")]
    Conflict { vertex: VertexId, parent: VertexId },
}

/// Labels the graph so that any two out-neighbours of a common parent get
/// complementary bits.
///
/// Constraints form a parity graph; each connected component receives one
/// free bit, drawn in ascending order of the component's smallest vertex from
/// `ChaCha8Rng::seed_from_u64(seed)`. Isolated vertices are components too.
pub fn complementary_sibling_labeling(g: &LabeledDigraph, seed: u64) -> Result<Vec<Label>, LabelingError> {
    if !g.alphabet().is_binary() {
        return Err(LabelingError::NotBinary);
    }
    let n = g.vertex_count();
    // (neighbour, parent that imposed the constraint)
    let mut differ: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); n];
    for parent in 0..n {
        let children: Vec<VertexId> = g.successors(parent).collect();
        for (i, &a) in children.iter().enumerate() {
            for &b in &children[i + 1..] {
                if a == b {
                    return Err(LabelingError::Conflict { vertex: a, parent });
                }
                differ[a].push((b, parent));
                differ[b].push((a, parent));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits: Vec<Option<bool>> = vec![None; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if bits[root].is_some() {
            continue;
        }
        bits[root] = Some(rng.gen());
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            let bit = bits[v].expect("queued vertices are assigned");
            for &(w, parent) in &differ[v] {
                match bits[w] {
                    None => {
                        bits[w] = Some(!bit);
                        queue.push_back(w);
                    }
                    Some(b) if b == bit => return Err(LabelingError::Conflict { vertex: w, parent }),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(bits.into_iter().map(|b| Label::bit(b.expect("every vertex visited"))).collect())
}
