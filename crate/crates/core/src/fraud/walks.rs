use crate::graph::{LabeledDigraph, Limits, VertexId};

use super::FraudError;

/// Every walk of `k` vertices from a start vertex, label-blind, stored flat.
#[derive(Debug, Clone)]
pub(crate) struct WalkTable {
    k: usize,
    vertices: Vec<u32>,
}

impl WalkTable {
    pub fn new(g: &LabeledDigraph, start: VertexId, k: usize, limits: &Limits) -> Result<Self, FraudError> {
        if k > 64 {
            return Err(FraudError::Precondition(format!("sequence length {k} exceeds 64")));
        }
        let total = crate::graph::walk_count(g, start, k)?;
        if total > limits.max_walks as u128 {
            return Err(FraudError::ResourceLimit(format!("{total} walks exceed the limit of {}", limits.max_walks)));
        }
        let mut vertices = Vec::with_capacity(total as usize * k);
        let mut path = vec![start as u32];
        collect(g, k, &mut path, &mut vertices);
        Ok(WalkTable { k, vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len() / self.k
    }

    /// Largest number of walks sharing one label sequence; walks are encoded
    /// as `sum bit(v_j) << j`.
    pub fn max_occurrence(&self, bit: impl Fn(u32) -> u64, scratch: &mut Vec<u64>) -> u64 {
        scratch.clear();
        for walk in self.vertices.chunks_exact(self.k) {
            let mut code = 0u64;
            for (j, &v) in walk.iter().enumerate() {
                code |= bit(v) << j;
            }
            scratch.push(code);
        }
        scratch.sort_unstable();
        let mut best = 0u64;
        let mut run = 0u64;
        let mut prev = None;
        for &c in scratch.iter() {
            if Some(c) == prev {
                run += 1;
            } else {
                run = 1;
                prev = Some(c);
            }
            best = best.max(run);
        }
        best
    }
}

fn collect(g: &LabeledDigraph, k: usize, path: &mut Vec<u32>, out: &mut Vec<u32>) {
    if path.len() == k {
        out.extend_from_slice(path);
        return;
    }
    let v = *path.last().expect("non-empty path") as usize;
    for w in g.successors(v) {
        path.push(w as u32);
        collect(g, k, path, out);
        path.pop();
    }
}
