use num_bigint::BigUint;
use rayon::prelude::*;

use super::walks::WalkTable;
use super::{FraudError, FraudLimits};
use crate::dyadic::{Dyadic, DyadicProbability};
use crate::graph::{LabeledDigraph, Limits, VertexId};

/// Distribution of the maximum occurrence count over a set of labelings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxDistribution {
    /// `histogram[j]` = number of labelings whose maximum count is `j`.
    pub histogram: Vec<u64>,
    /// The labelings enumerated number `2^log2_labelings`.
    pub log2_labelings: u64,
}

impl MaxDistribution {
    /// `Pr(M < x)`.
    pub fn cdf(&self, x: u64) -> DyadicProbability {
        let below: u64 = self.histogram.iter().take(x as usize).sum();
        DyadicProbability::from_count(BigUint::from(below), self.log2_labelings)
    }

    pub fn expected(&self) -> Dyadic {
        let weighted: u128 = self.histogram.iter().enumerate().map(|(j, &c)| j as u128 * c as u128).sum();
        Dyadic::from_u128(weighted, self.log2_labelings)
    }
}

/// Enumerates every binary labeling of `g` (optionally holding one vertex
/// fixed) and tallies `max_t occ_start(t)` over sequences of `k` vertices.
pub fn brute_force_max_distribution(
    g: &LabeledDigraph,
    start: VertexId,
    k: usize,
    fixed: Option<(VertexId, bool)>,
    limits: &FraudLimits,
) -> Result<MaxDistribution, FraudError> {
    g.check_vertex(start)?;
    if let Some((v, _)) = fixed {
        g.check_vertex(v)?;
    }
    let n = g.vertex_count();
    let free = n - fixed.is_some() as usize;
    if free > limits.max_brute_vertices {
        return Err(FraudError::ResourceLimit(format!(
            "brute force over 2^{free} labelings refused (limit 2^{})",
            limits.max_brute_vertices
        )));
    }
    let walks = WalkTable::new(g, start, k, &Limits::default())?;
    // Free vertices take consecutive bits of the labeling index.
    let slot: Vec<Option<u32>> = {
        let mut next = 0u32;
        (0..n)
            .map(|v| match fixed {
                Some((f, _)) if f == v => None,
                _ => {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    };
    let fixed_bit = fixed.map(|(_, b)| b as u64).unwrap_or(0);
    let bins = walks.len() + 1;
    let total = 1u64 << free;
    let chunk = 1u64 << free.min(12);
    let histogram = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![0u64; bins];
            let mut scratch = Vec::with_capacity(walks.len());
            for mask in c * chunk..(c + 1) * chunk {
                let best = walks.max_occurrence(
                    |v| match slot[v as usize] {
                        Some(s) => (mask >> s) & 1,
                        None => fixed_bit,
                    },
                    &mut scratch,
                );
                hist[best as usize] += 1;
            }
            hist
        })
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(MaxDistribution { histogram, log2_labelings: free as u64 })
}

/// Exact `E(M_{G,v,n})` by enumerating all `2^|V|` labelings.
pub fn brute_force_expected_max(
    g: &LabeledDigraph,
    start: VertexId,
    n: u32,
    limits: &FraudLimits,
) -> Result<Dyadic, FraudError> {
    if n == 0 {
        return Err(FraudError::Precondition("rounds must be at least 1".into()));
    }
    Ok(brute_force_max_distribution(g, start, n as usize + 1, None, limits)?.expected())
}
