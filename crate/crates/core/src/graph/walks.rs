use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GraphError, Label, LabelSequence, LabeledDigraph, VertexId};

/// Explosion limits for enumeration-based routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_walks: u64,
    pub max_candidates: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_walks: 1 << 26, max_candidates: 1 << 26 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MfsMode {
    /// Pick whichever side has the smaller bound.
    Auto,
    /// Evaluate every candidate sequence by prefix DP.
    #[serde(rename = "seq")]
    Sequence,
    /// Enumerate walks and aggregate their label sequences.
    Walk,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MfsResult {
    pub sequence: LabelSequence,
    pub count: u128,
    /// Number of length-k sequences attaining `count`.
    pub tie_count: u128,
    /// Mode that produced the answer (never `Auto`).
    pub mode: MfsMode,
}

/// Number of walks `v_1 .. v_k` from `start` whose labels spell `t`.
pub fn occ_count(g: &LabeledDigraph, start: VertexId, t: &LabelSequence) -> Result<u128, GraphError> {
    g.check_vertex(start)?;
    if let Some(l) = t.symbols().iter().find(|l| l.index() >= g.alphabet().len()) {
        return Err(GraphError::LabelOutOfAlphabet { label: l.0, size: g.alphabet().len() });
    }
    let symbols = t.symbols();
    if g.label(start) != symbols[0] {
        return Ok(0);
    }
    let n = g.vertex_count();
    let mut cur = vec![0u128; n];
    cur[start] = 1;
    for &symbol in &symbols[1..] {
        let mut next = vec![0u128; n];
        for (v, &c) in cur.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for w in g.successors(v) {
                if g.label(w) == symbol {
                    next[w] = next[w].checked_add(c).ok_or(GraphError::CountOverflow)?;
                }
            }
        }
        cur = next;
    }
    cur.iter().try_fold(0u128, |acc, &c| acc.checked_add(c).ok_or(GraphError::CountOverflow))
}

/// Label-blind count of walks with `k` vertices starting at `start`.
pub fn walk_count(g: &LabeledDigraph, start: VertexId, k: usize) -> Result<u128, GraphError> {
    g.check_vertex(start)?;
    if k == 0 {
        return Err(GraphError::EmptySequence);
    }
    let n = g.vertex_count();
    let mut cur = vec![0u128; n];
    cur[start] = 1;
    for _ in 1..k {
        let mut next = vec![0u128; n];
        for (v, &c) in cur.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for w in g.successors(v) {
                next[w] = next[w].checked_add(c).ok_or(GraphError::CountOverflow)?;
            }
        }
        cur = next;
    }
    cur.iter().try_fold(0u128, |acc, &c| acc.checked_add(c).ok_or(GraphError::CountOverflow))
}

/// Multiset of label sequences of full-length walks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SequenceMultiset {
    counts: BTreeMap<LabelSequence, u64>,
    walks: u64,
}

impl SequenceMultiset {
    pub fn multiplicity(&self, t: &LabelSequence) -> u64 {
        self.counts.get(t).copied().unwrap_or(0)
    }

    /// Total number of walks enumerated.
    pub fn total(&self) -> u64 {
        self.walks
    }

    pub fn max_multiplicity(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LabelSequence, u64)> {
        self.counts.iter().map(|(s, &c)| (s, c))
    }
}

/// Enumerates every walk of `k` vertices from `start`. Walks that dead-end
/// early are not counted.
pub fn enumerate_walk_sequences(
    g: &LabeledDigraph,
    start: VertexId,
    k: usize,
    limits: &Limits,
) -> Result<SequenceMultiset, GraphError> {
    let total = walk_count(g, start, k)?;
    if total > limits.max_walks as u128 {
        return Err(GraphError::LimitExceeded { what: "walk", needed: total, limit: limits.max_walks });
    }
    let mut out = SequenceMultiset::default();
    let mut path = Vec::with_capacity(k);
    path.push(g.label(start));
    collect_walks(g, start, k, &mut path, &mut out);
    debug_assert_eq!(out.walks as u128, total);
    Ok(out)
}

fn collect_walks(g: &LabeledDigraph, v: VertexId, k: usize, path: &mut Vec<Label>, out: &mut SequenceMultiset) {
    if path.len() == k {
        *out.counts.entry(LabelSequence(path.clone())).or_insert(0) += 1;
        out.walks += 1;
        return;
    }
    for w in g.successors(v) {
        path.push(g.label(w));
        collect_walks(g, w, k, path, out);
        path.pop();
    }
}

fn candidate_count(alphabet: usize, k: usize) -> u128 {
    (alphabet as u128).checked_pow(k as u32).unwrap_or(u128::MAX)
}

/// Most frequent label sequence of `k` vertices starting at `start`.
///
/// Ties go to the lexicographically smallest sequence in alphabet order. If no
/// walk of `k` vertices exists every sequence ties at zero.
pub fn most_frequent_sequence(
    g: &LabeledDigraph,
    start: VertexId,
    k: usize,
    mode: MfsMode,
    limits: &Limits,
) -> Result<MfsResult, GraphError> {
    g.check_vertex(start)?;
    if k == 0 {
        return Err(GraphError::EmptySequence);
    }
    let candidates = candidate_count(g.alphabet().len(), k);
    let mode = match mode {
        MfsMode::Auto => {
            let walks = walk_count(g, start, k)?;
            if walks <= limits.max_walks as u128 && (walks <= candidates || candidates > limits.max_candidates as u128)
            {
                MfsMode::Walk
            } else {
                MfsMode::Sequence
            }
        }
        m => m,
    };
    match mode {
        MfsMode::Walk => mfs_by_walks(g, start, k, candidates, limits),
        _ => {
            if candidates > limits.max_candidates as u128 {
                return Err(GraphError::LimitExceeded {
                    what: "candidate sequence",
                    needed: candidates,
                    limit: limits.max_candidates,
                });
            }
            mfs_by_sequences(g, start, k, candidates)
        }
    }
}

fn zero_result(k: usize, candidates: u128, mode: MfsMode) -> MfsResult {
    MfsResult { sequence: LabelSequence(vec![Label(0); k]), count: 0, tie_count: candidates, mode }
}

fn mfs_by_walks(
    g: &LabeledDigraph,
    start: VertexId,
    k: usize,
    candidates: u128,
    limits: &Limits,
) -> Result<MfsResult, GraphError> {
    let multiset = enumerate_walk_sequences(g, start, k, limits)?;
    let best = multiset.max_multiplicity();
    if best == 0 {
        return Ok(zero_result(k, candidates, MfsMode::Walk));
    }
    // BTreeMap iteration is lexicographic, so the first maximiser is the smallest.
    let mut winner = None;
    let mut ties = 0u128;
    for (seq, c) in multiset.iter() {
        if c == best {
            ties += 1;
            winner.get_or_insert_with(|| seq.clone());
        }
    }
    Ok(MfsResult { sequence: winner.expect("nonzero max"), count: best as u128, tie_count: ties, mode: MfsMode::Walk })
}

struct SequenceSearch<'g> {
    g: &'g LabeledDigraph,
    k: usize,
    prefix: Vec<Label>,
    best: u128,
    best_seq: Vec<Label>,
    ties: u128,
}

impl SequenceSearch<'_> {
    // frontier: (vertex, number of walks matching the prefix and ending there)
    fn descend(&mut self, frontier: &[(VertexId, u128)]) -> Result<(), GraphError> {
        if self.prefix.len() == self.k {
            let count =
                frontier.iter().try_fold(0u128, |a, &(_, c)| a.checked_add(c)).ok_or(GraphError::CountOverflow)?;
            if count > self.best {
                self.best = count;
                self.best_seq = self.prefix.clone();
                self.ties = 1;
            } else if count == self.best {
                self.ties += 1;
            }
            return Ok(());
        }
        for s in 0..self.g.alphabet().len() {
            let symbol = Label(s as u16);
            let mut next: BTreeMap<VertexId, u128> = BTreeMap::new();
            for &(v, c) in frontier {
                for w in self.g.successors(v) {
                    if self.g.label(w) == symbol {
                        let slot = next.entry(w).or_insert(0);
                        *slot = slot.checked_add(c).ok_or(GraphError::CountOverflow)?;
                    }
                }
            }
            // Zero-count subtrees only matter when everything is zero.
            if next.is_empty() {
                continue;
            }
            let next: Vec<(VertexId, u128)> = next.into_iter().collect();
            self.prefix.push(symbol);
            self.descend(&next)?;
            self.prefix.pop();
        }
        Ok(())
    }
}

fn mfs_by_sequences(g: &LabeledDigraph, start: VertexId, k: usize, candidates: u128) -> Result<MfsResult, GraphError> {
    let mut search = SequenceSearch { g, k, prefix: vec![g.label(start)], best: 0, best_seq: Vec::new(), ties: 0 };
    search.descend(&[(start, 1)])?;
    if search.best == 0 {
        return Ok(zero_result(k, candidates, MfsMode::Sequence));
    }
    Ok(MfsResult {
        sequence: LabelSequence(search.best_seq),
        count: search.best,
        tie_count: search.ties,
        mode: MfsMode::Sequence,
    })
}
