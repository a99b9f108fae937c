use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::walks::WalkTable;
use super::FraudError;
use crate::graph::{LabeledDigraph, Limits, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Sample `i` draws its labeling from `ChaCha8Rng::seed_from_u64(seed)` on
/// stream `i`, so results do not depend on scheduling.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean of `max_t occ_start(t)` over `samples` uniform labelings, with the
/// sample standard error.
pub fn monte_carlo_expected_max(
    g: &LabeledDigraph,
    start: VertexId,
    n: u32,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, FraudError> {
    if samples == 0 {
        return Err(FraudError::Precondition("samples must be at least 1".into()));
    }
    if n == 0 {
        return Err(FraudError::Precondition("rounds must be at least 1".into()));
    }
    g.check_vertex(start)?;
    let walks = WalkTable::new(g, start, n as usize + 1, &Limits::default())?;
    let vertices = g.vertex_count();
    let (sum, sum_sq) = (0..samples)
        .into_par_iter()
        .map_init(
            || (Vec::new(), vec![0u64; vertices]),
            |(scratch, bits), i| {
                let mut rng = sample_rng(seed, i);
                bits.iter_mut().for_each(|b| *b = rng.gen::<bool>() as u64);
                let best = walks.max_occurrence(|v| bits[v as usize], scratch) as f64;
                (best, best * best)
            },
        )
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let count = samples as f64;
    let mean = sum / count;
    let variance = if samples > 1 { ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0) } else { 0.0 };
    Ok(MonteCarloEstimate { mean, std_error: (variance / count).sqrt(), samples, seed })
}
