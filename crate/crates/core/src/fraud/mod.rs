//! Distance-fraud success probability: exact recursion for the tree protocol,
//! brute force over labelings for any graph, and Monte-Carlo estimation.
//!
//! The success probability of the early-reply adversary is `E(M) / 2^n`,
//! where `M` is the largest number of walks of `n + 1` vertices from the start
//! that share a label sequence, over a uniformly random vertex labeling.

mod brute;
mod montecarlo;
mod recursion;
mod walks;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dyadic::{Dyadic, DyadicProbability};
use crate::graph::GraphError;

pub use brute::{brute_force_expected_max, brute_force_max_distribution, MaxDistribution};
pub use montecarlo::{monte_carlo_expected_max, sample_rng, MonteCarloEstimate};
pub use recursion::{base_case_prob, recursive_prob, FloatTables, SweepMemo, TreeTables};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FraudError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl FraudError {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, FraudError::ResourceLimit(_) | FraudError::Graph(GraphError::LimitExceeded { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FraudLimits {
    /// Largest `n` accepted by the exact tree recursion.
    pub max_exact_rounds: u32,
    /// Brute force enumerates at most `2^max_brute_vertices` labelings.
    pub max_brute_vertices: usize,
    /// Permit float-mode runs beyond `max_exact_rounds`.
    pub allow_large: bool,
}

impl Default for FraudLimits {
    fn default() -> Self {
        FraudLimits { max_exact_rounds: 12, max_brute_vertices: 22, allow_large: false }
    }
}

/// Hard cap for float mode even with the override.
const MAX_FLOAT_ROUNDS: u32 = 13;

/// `Pr(M_n < x)` for `x = 1 ..= 2^n + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CdfTable {
    pub n: u32,
    values: Vec<DyadicProbability>,
}

impl CdfTable {
    pub fn get(&self, x: u64) -> Option<&DyadicProbability> {
        x.checked_sub(1).and_then(|i| self.values.get(i as usize))
    }

    pub fn values(&self) -> &[DyadicProbability] {
        &self.values
    }

    pub fn is_valid(&self) -> bool {
        self.values.first() == Some(&DyadicProbability::zero())
            && self.values.last() == Some(&DyadicProbability::one())
            && self.values.windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeAnalysis {
    pub n: u32,
    pub expected_max: Dyadic,
    pub cdf: CdfTable,
}

/// `E(M_n) = sum_{i=1}^{2^n} (Pr(M < i+1) - Pr(M < i)) i`.
fn expectation_from_cdf(values: &[Dyadic]) -> Dyadic {
    let mut total = Dyadic::zero();
    for (idx, pair) in values.windows(2).enumerate() {
        let mass = pair[1].checked_sub(&pair[0]).expect("cdf is nondecreasing");
        let i = Dyadic::integer(idx as u64 + 1);
        total = &total + &(&mass * &i);
    }
    total
}

/// Exact `E(M_n)` and the full CDF of the full binary tree of depth `n`.
///
/// Each `x` gets its own memo over `(m, level)`; the sweep runs in parallel.
pub fn expected_max_tree(n: u32, limits: &FraudLimits) -> Result<TreeAnalysis, FraudError> {
    if n == 0 {
        return Err(FraudError::Precondition("rounds must be at least 1".into()));
    }
    if n > limits.max_exact_rounds {
        return Err(FraudError::ResourceLimit(format!(
            "exact mode supports n <= {}; use float mode with the large-n override",
            limits.max_exact_rounds
        )));
    }
    let tables = TreeTables::for_rounds(n)?;
    let top = (1u64 << n) + 1;
    let values: Vec<DyadicProbability> = (1..=top)
        .into_par_iter()
        .map_init(SweepMemo::new, |memo, x| tables.recursive_prob(1, n, x, memo))
        .collect::<Result<_, _>>()?;
    let plain: Vec<Dyadic> = values.iter().map(|p| p.value().clone()).collect();
    let expected_max = expectation_from_cdf(&plain);
    Ok(TreeAnalysis { n, expected_max, cdf: CdfTable { n, values } })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatTreeAnalysis {
    pub n: u32,
    pub expected_max: f64,
    pub cdf: Vec<f64>,
}

/// Floating-point `E(M_n)`. Binomial masses come from a product recurrence,
/// so relative error grows roughly linearly in `2^n`; exact mode is
/// authoritative where it is affordable.
pub fn expected_max_tree_float(n: u32, limits: &FraudLimits) -> Result<FloatTreeAnalysis, FraudError> {
    if n == 0 {
        return Err(FraudError::Precondition("rounds must be at least 1".into()));
    }
    if n > limits.max_exact_rounds && !limits.allow_large {
        return Err(FraudError::ResourceLimit(format!(
            "n = {n} exceeds {} without the large-n override",
            limits.max_exact_rounds
        )));
    }
    if n > MAX_FLOAT_ROUNDS {
        return Err(FraudError::ResourceLimit(format!("float mode is capped at n = {MAX_FLOAT_ROUNDS}")));
    }
    let tables = FloatTables::new(1u64 << (n - 1));
    let top = (1u64 << n) + 1;
    let cdf: Vec<f64> = (1..=top)
        .into_par_iter()
        .map_init(HashMap::new, |memo, x| {
            memo.clear();
            tables.prob(1, n, x, memo)
        })
        .collect();
    let expected_max = cdf.windows(2).enumerate().map(|(i, w)| (w[1] - w[0]) * (i as f64 + 1.0)).sum();
    Ok(FloatTreeAnalysis { n, expected_max, cdf })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactDp,
    FloatDp,
    BruteForce,
    MonteCarlo,
}

/// `E(M)` and the success probability `E(M) / 2^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceFraudReport {
    pub rounds: u32,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_max: Option<Dyadic>,
    pub expected_max_decimal: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_probability: Option<Dyadic>,
    pub success_probability_decimal: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloEstimate>,
}

impl DistanceFraudReport {
    pub fn exact(rounds: u32, method: Method, expected_max: Dyadic) -> Self {
        let success = expected_max.halve(rounds as u64);
        DistanceFraudReport {
            rounds,
            method,
            expected_max_decimal: expected_max.to_f64(),
            success_probability_decimal: success.to_f64(),
            expected_max: Some(expected_max),
            success_probability: Some(success),
            monte_carlo: None,
        }
    }

    pub fn float(rounds: u32, expected_max: f64) -> Self {
        DistanceFraudReport {
            rounds,
            method: Method::FloatDp,
            expected_max: None,
            expected_max_decimal: expected_max,
            success_probability: None,
            success_probability_decimal: expected_max / 2f64.powi(rounds as i32),
            monte_carlo: None,
        }
    }

    pub fn monte_carlo(rounds: u32, estimate: MonteCarloEstimate) -> Self {
        DistanceFraudReport {
            rounds,
            method: Method::MonteCarlo,
            expected_max: None,
            expected_max_decimal: estimate.mean,
            success_probability: None,
            success_probability_decimal: estimate.mean / 2f64.powi(rounds as i32),
            monte_carlo: Some(estimate),
        }
    }

    /// `2^-n <= p <= 1`, checked exactly when an exact value is present.
    pub fn within_bounds(&self) -> bool {
        match &self.success_probability {
            Some(p) => *p >= Dyadic::one().halve(self.rounds as u64) && *p <= Dyadic::one(),
            None => {
                let p = self.success_probability_decimal;
                p >= 2f64.powi(-(self.rounds as i32)) * (1.0 - 1e-12) && p <= 1.0 + 1e-12
            }
        }
    }
}

/// Helper for CLI and tests: exact tree report.
pub fn tree_report(n: u32, limits: &FraudLimits) -> Result<DistanceFraudReport, FraudError> {
    let analysis = expected_max_tree(n, limits)?;
    Ok(DistanceFraudReport::exact(n, Method::ExactDp, analysis.expected_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_round_tree() {
        let a = expected_max_tree(1, &FraudLimits::default()).unwrap();
        assert_eq!(a.expected_max, Dyadic::from_u128(3, 1));
        assert!(a.cdf.is_valid());
        let r = DistanceFraudReport::exact(1, Method::ExactDp, a.expected_max);
        assert_eq!(r.success_probability_decimal, 0.75);
        assert!(r.within_bounds());
    }

    #[test]
    fn limits_refuse() {
        let limits = FraudLimits::default();
        assert!(expected_max_tree(13, &limits).unwrap_err().is_resource_limit());
        assert!(expected_max_tree(0, &limits).is_err());
        assert!(expected_max_tree_float(13, &limits).unwrap_err().is_resource_limit());
        let loose = FraudLimits { allow_large: true, ..limits };
        assert!(expected_max_tree_float(14, &loose).unwrap_err().is_resource_limit());
    }

    #[test]
    fn cdf_lookup() {
        let a = expected_max_tree(2, &FraudLimits::default()).unwrap();
        assert_eq!(a.cdf.get(0), None);
        assert_eq!(a.cdf.get(1), Some(&DyadicProbability::zero()));
        assert_eq!(a.cdf.get(5), Some(&DyadicProbability::one()));
        assert_eq!(a.cdf.get(6), None);
    }
}
