use serde::Serialize;
use thiserror::Error;

use super::brute_force_sat;
use super::cnf::CnfFormula;
use super::reduction::{reduce_sat_to_mfs, ReductionOutput, Role};
use crate::graph::{
    enumerate_walk_sequences, most_frequent_sequence, GraphError, Label, LabelSequence, Limits, MfsMode, MfsResult,
    VertexId,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("sequence has {got} symbols, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("position {position} of the {prefix}-symbol prefix is 0, expected all ones")]
    Prefix { prefix: usize, position: usize },
}

/// `x_j = s_(j + d)` (1-based positions), after checking the all-ones prefix
/// of length `d + 1`.
pub fn extract_assignment(r: &ReductionOutput, s: &LabelSequence) -> Result<Vec<bool>, ExtractError> {
    let p = &r.params;
    if s.len() != p.target_length {
        return Err(ExtractError::Length { expected: p.target_length, got: s.len() });
    }
    let prefix = p.depth as usize + 1;
    if let Some(pos) = s.symbols()[..prefix].iter().position(|&b| b != Label::ONE) {
        return Err(ExtractError::Prefix { prefix, position: pos + 1 });
    }
    Ok(s.symbols()[prefix..].iter().map(|&b| b == Label::ONE).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkLengthVerdict {
    pub passed: bool,
    /// Maximal walks with `n + d` edges ending on the backbone.
    pub full_walks: u64,
    /// Maximal walks with `n - 1 + d` edges ending at a lane dead end.
    pub dead_end_walks: u64,
    pub longest_edges: usize,
    pub violations: Vec<String>,
}

/// Enumerates maximal walks from the root and checks their lengths and end
/// points.
pub fn check_walk_lengths(r: &ReductionOutput) -> WalkLengthVerdict {
    let g = &r.graph;
    let n = r.params.variables as usize;
    let d = r.params.depth as usize;
    let mut verdict =
        WalkLengthVerdict { passed: false, full_walks: 0, dead_end_walks: 0, longest_edges: 0, violations: Vec::new() };
    // The reduction graph is acyclic, so a DFS over (vertex, depth) terminates.
    let mut stack: Vec<(VertexId, usize)> = vec![(ReductionOutput::ROOT, 0)];
    while let Some((v, edges)) = stack.pop() {
        if g.out_degree(v) > 0 {
            stack.extend(g.successors(v).map(|w| (w, edges + 1)));
            continue;
        }
        verdict.longest_edges = verdict.longest_edges.max(edges);
        let role = r.role(v);
        let on_backbone =
            matches!(role, Role::SharedU { variable } | Role::SharedV { variable } if variable as usize == n);
        let lane_end =
            matches!(role, Role::LaneU { variable, .. } | Role::LaneV { variable, .. } if variable as usize == n - 1);
        if on_backbone && edges == n + d {
            verdict.full_walks += 1;
        } else if lane_end && edges + 1 == n + d {
            verdict.dead_end_walks += 1;
        } else if verdict.violations.len() < 16 {
            verdict.violations.push(format!("maximal walk of {edges} edges ends at {role}"));
        }
    }
    if verdict.full_walks == 0 {
        verdict.violations.push("no maximal walk reaches the backbone end".into());
    }
    verdict.passed = verdict.violations.is_empty();
    verdict
}

/// Largest multiplicity of any target-length sequence, by walk enumeration.
pub fn max_target_multiplicity(r: &ReductionOutput, limits: &Limits) -> Result<u64, GraphError> {
    let set = enumerate_walk_sequences(&r.graph, ReductionOutput::ROOT, r.params.target_length, limits)?;
    Ok(set.max_multiplicity())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionVerdict {
    pub consistent: bool,
    pub clauses: usize,
    pub satisfiable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<bool>>,
    pub mfs_count: u128,
    pub mfs_sequence: String,
    /// Assignment decoded from the maximizer when its count equals `m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extracted: Option<Vec<bool>>,
    pub summary: String,
}

/// Checks `(max count = m) <=> satisfiable` on the reduction of `f`, and that
/// a count-`m` maximizer decodes to a satisfying assignment.
pub fn verify_reduction(f: &CnfFormula) -> Result<ReductionVerdict, GraphError> {
    let r = reduce_sat_to_mfs(f);
    verify_reduction_output(f, &r, &Limits::default())
}

pub fn verify_reduction_output(
    f: &CnfFormula,
    r: &ReductionOutput,
    limits: &Limits,
) -> Result<ReductionVerdict, GraphError> {
    let m = f.clause_count();
    let witness = brute_force_sat(f).map_err(|e| GraphError::LimitExceeded {
        what: "brute-force SAT variables",
        needed: e.variables as u128,
        limit: e.limit as u64,
    })?;
    let mfs: MfsResult =
        most_frequent_sequence(&r.graph, ReductionOutput::ROOT, r.params.target_length, MfsMode::Auto, limits)?;
    let satisfiable = witness.is_some();
    let hit = mfs.count == m as u128;
    let mut problems = Vec::new();
    if hit != satisfiable {
        problems.push(format!("count {} vs m = {m} disagrees with satisfiable = {satisfiable}", mfs.count));
    }
    if mfs.count > m as u128 {
        problems.push(format!("count {} exceeds m = {m}", mfs.count));
    }
    let extracted = if hit {
        match extract_assignment(r, &mfs.sequence) {
            Ok(a) => {
                if !f.eval(&a) {
                    problems.push("decoded assignment does not satisfy the formula".into());
                }
                Some(a)
            }
            Err(e) => {
                problems.push(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let consistent = problems.is_empty();
    let summary = if !consistent {
        problems.join("; ")
    } else if satisfiable {
        format!("count = m = {m}, satisfiable — consistent")
    } else {
        format!("count {} < m = {m}, unsatisfiable — consistent", mfs.count)
    };
    Ok(ReductionVerdict {
        consistent,
        clauses: m,
        satisfiable,
        witness,
        mfs_count: mfs.count,
        mfs_sequence: mfs.sequence.to_string(),
        extracted,
        summary,
    })
}
