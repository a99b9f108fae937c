//! Round-by-round simulation of the graph-based challenge-response protocol
//! and of distance-fraud adversaries against it.
//!
//! Round `i` moves the walk from `v_(i-1)` along the out-edge labelled `c_i`;
//! the verifier expects `l_V(v_i)`. Timing is abstract: each round carries a
//! flag saying whether the reply arrived within the bound.

mod prf;

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use prf::{label_graph_from_prf, session_stream};

use crate::graph::{most_frequent_sequence, GraphError, Label, LabeledDigraph, Limits, MfsMode, VertexId};

/// Nonce length drawn per party per session.
pub const NONCE_BYTES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("rounds must be at least 1")]
    NoRounds,
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("vertex {vertex} is reachable in {depth} steps but has out-degree {degree}; every vertex reachable in fewer than {rounds} steps needs two out-edges")]
    PrematureDeadEnd { vertex: VertexId, depth: u32, degree: usize, rounds: u32 },
    #[error("vertex {vertex} has out-edges without distinct 0/1 labels")]
    MissingEdgeLabels { vertex: VertexId },
    #[error("graph must be binary with out-degree at most 2")]
    NotBinary,
    #[error("{what} has length {got}, expected {expected}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("reply bit {0} is not 0 or 1")]
    NonBinaryReply(u8),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimingModel {
    AllPass,
    /// `flags[i]` is the timing check of round `i + 1`.
    Flags(Vec<bool>),
}

impl TimingModel {
    fn passes(&self, round: usize) -> bool {
        match self {
            TimingModel::AllPass => true,
            TimingModel::Flags(f) => f[round],
        }
    }
}

/// Where the session labeling comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelSource {
    /// Fresh `l_V`, `l_E` per session from the keyed stream.
    Prf,
    /// The config graph's own vertex and edge labels, for every session.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub graph: LabeledDigraph,
    pub start: VertexId,
    pub rounds: u32,
    pub key: Vec<u8>,
    pub trials: u64,
    pub seed: u64,
    pub timing: TimingModel,
    pub labels: LabelSource,
}

impl ProtocolConfig {
    /// PRF-labelled config with all-pass timing.
    pub fn new(graph: LabeledDigraph, start: VertexId, rounds: u32) -> Self {
        ProtocolConfig {
            graph,
            start,
            rounds,
            key: b"shared key".to_vec(),
            trials: 1,
            seed: 0,
            timing: TimingModel::AllPass,
            labels: LabelSource::Prf,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let g = &self.graph;
        g.check_vertex(self.start)?;
        if self.rounds == 0 {
            return Err(ProtocolError::NoRounds);
        }
        if self.trials == 0 {
            return Err(ProtocolError::NoTrials);
        }
        if !g.alphabet().is_binary() || g.max_out_degree() > 2 {
            return Err(ProtocolError::NotBinary);
        }
        if let TimingModel::Flags(f) = &self.timing {
            if f.len() != self.rounds as usize {
                return Err(ProtocolError::Length {
                    what: "timing flags",
                    expected: self.rounds as usize,
                    got: f.len(),
                });
            }
        }
        // Breadth-first over depths 0..rounds-1.
        let mut seen = vec![false; g.vertex_count()];
        let mut frontier = vec![self.start];
        seen[self.start] = true;
        for depth in 0..self.rounds {
            let mut next = Vec::new();
            for &v in &frontier {
                if g.out_degree(v) != 2 {
                    return Err(ProtocolError::PrematureDeadEnd {
                        vertex: v,
                        depth,
                        degree: g.out_degree(v),
                        rounds: self.rounds,
                    });
                }
                if self.labels == LabelSource::Fixed && (g.follow(v, 0).is_none() || g.follow(v, 1).is_none()) {
                    return Err(ProtocolError::MissingEdgeLabels { vertex: v });
                }
                for w in g.successors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        Ok(())
    }

    fn session_graph(&self, nonce_v: &[u8], nonce_p: &[u8]) -> LabeledDigraph {
        match self.labels {
            LabelSource::Prf => label_graph_from_prf(&self.graph, &self.key, nonce_v, nonce_p),
            LabelSource::Fixed => self.graph.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdversaryStrategy {
    /// Waits for each challenge and answers with the reached vertex label.
    Honest,
    /// Sends all replies before the challenges; `None` solves the MFS on the
    /// session labeling and replies with its last `n` symbols.
    EarlyReply { replies: Option<Vec<u8>> },
    /// Experimental heuristic: each reply is the label carrying the most walk
    /// weight among vertices still consistent with the earlier replies.
    Greedy,
}

impl AdversaryStrategy {
    /// Replies chosen before any challenge is seen; `None` for the honest prover.
    fn precompute(&self, g: &LabeledDigraph, start: VertexId, rounds: u32) -> Result<Option<Vec<u8>>, ProtocolError> {
        match self {
            AdversaryStrategy::Honest => Ok(None),
            AdversaryStrategy::EarlyReply { replies: Some(r) } => {
                if r.len() != rounds as usize {
                    return Err(ProtocolError::Length {
                        what: "reply sequence",
                        expected: rounds as usize,
                        got: r.len(),
                    });
                }
                if let Some(&b) = r.iter().find(|&&b| b > 1) {
                    return Err(ProtocolError::NonBinaryReply(b));
                }
                Ok(Some(r.clone()))
            }
            AdversaryStrategy::EarlyReply { replies: None } => {
                let mfs = most_frequent_sequence(g, start, rounds as usize + 1, MfsMode::Auto, &Limits::default())?;
                Ok(Some(mfs.sequence.bits()[1..].to_vec()))
            }
            AdversaryStrategy::Greedy => Ok(Some(greedy_replies(g, start, rounds))),
        }
    }
}

/// Greedy reply construction: keep the multiset of vertices reachable by
/// walks matching the replies so far and pick the majority label among their
/// successors (ties to 0).
pub fn greedy_replies(g: &LabeledDigraph, start: VertexId, rounds: u32) -> Vec<u8> {
    let mut weight = vec![0u128; g.vertex_count()];
    weight[start] = 1;
    let mut replies = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        let mut next = vec![0u128; g.vertex_count()];
        for (v, &w) in weight.iter().enumerate().filter(|(_, &w)| w > 0) {
            for s in g.successors(v) {
                next[s] += w;
            }
        }
        let ones: u128 = next.iter().enumerate().filter(|(s, _)| g.label(*s) == Label::ONE).map(|(_, &w)| w).sum();
        let zeros: u128 = next.iter().sum::<u128>() - ones;
        let bit = (ones > zeros) as u8;
        for (s, w) in next.iter_mut().enumerate() {
            if g.label(s).index() != bit as usize {
                *w = 0;
            }
        }
        replies.push(bit);
        weight = next;
    }
    replies
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: u32,
    pub challenge: u8,
    pub response: u8,
    pub expected: u8,
    pub timing_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject { round: u32, reason: RejectReason },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    WrongResponse,
    Timing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionTranscript {
    pub trial: u64,
    pub nonce_v: String,
    pub nonce_p: String,
    pub rounds: Vec<RoundRecord>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl SessionTranscript {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one session with caller-chosen nonces and challenges.
pub fn run_session_with(
    config: &ProtocolConfig,
    strategy: &AdversaryStrategy,
    nonce_v: &[u8],
    nonce_p: &[u8],
    challenges: &[u8],
) -> Result<SessionTranscript, ProtocolError> {
    config.validate()?;
    run_validated(config, strategy, 0, nonce_v, nonce_p, challenges)
}

fn run_validated(
    config: &ProtocolConfig,
    strategy: &AdversaryStrategy,
    trial: u64,
    nonce_v: &[u8],
    nonce_p: &[u8],
    challenges: &[u8],
) -> Result<SessionTranscript, ProtocolError> {
    let n = config.rounds as usize;
    if challenges.len() != n {
        return Err(ProtocolError::Length { what: "challenge string", expected: n, got: challenges.len() });
    }
    let g = config.session_graph(nonce_v, nonce_p);
    let early = strategy.precompute(&g, config.start, config.rounds)?;
    let mut rounds = Vec::with_capacity(n);
    let mut verdict = Verdict::Accept;
    let mut v = config.start;
    for (i, &c) in challenges.iter().enumerate() {
        v = g.follow(v, c).expect("validated: every reachable vertex has both challenge edges");
        let expected = g.label(v).index() as u8;
        let response = early.as_ref().map_or(expected, |r| r[i]);
        let timing_ok = config.timing.passes(i);
        let round = i as u32 + 1;
        if verdict == Verdict::Accept {
            if response != expected {
                verdict = Verdict::Reject { round, reason: RejectReason::WrongResponse };
            } else if !timing_ok {
                verdict = Verdict::Reject { round, reason: RejectReason::Timing };
            }
        }
        rounds.push(RoundRecord { round, challenge: c, response, expected, timing_ok });
    }
    Ok(SessionTranscript { trial, nonce_v: hex(nonce_v), nonce_p: hex(nonce_p), rounds, verdict })
}

/// Per-trial generator: stream `trial` of `ChaCha8Rng::seed_from_u64(seed)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Session `trial`: nonces `N_V`, `N_P` then `n` challenge bits, all drawn
/// from [`trial_rng`].
pub fn run_session(
    config: &ProtocolConfig,
    strategy: &AdversaryStrategy,
    trial: u64,
) -> Result<SessionTranscript, ProtocolError> {
    config.validate()?;
    run_trial(config, strategy, trial)
}

fn run_trial(
    config: &ProtocolConfig,
    strategy: &AdversaryStrategy,
    trial: u64,
) -> Result<SessionTranscript, ProtocolError> {
    let mut rng = trial_rng(config.seed, trial);
    let mut nonce_v = [0u8; NONCE_BYTES];
    let mut nonce_p = [0u8; NONCE_BYTES];
    rng.fill(&mut nonce_v);
    rng.fill(&mut nonce_p);
    let challenges: Vec<u8> = (0..config.rounds).map(|_| rng.gen::<bool>() as u8).collect();
    run_validated(config, strategy, trial, &nonce_v, &nonce_p, &challenges)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessEstimate {
    pub rate: f64,
    pub std_error: f64,
    pub accepted: u64,
    pub trials: u64,
    pub seed: u64,
}

/// Acceptance rate over `config.trials` independent sessions.
pub fn estimate_success_rate(
    config: &ProtocolConfig,
    strategy: &AdversaryStrategy,
) -> Result<SuccessEstimate, ProtocolError> {
    config.validate()?;
    let accepted = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, strategy, t).map(|s| s.accepted() as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let trials = config.trials;
    let rate = accepted as f64 / trials as f64;
    Ok(SuccessEstimate {
        rate,
        std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        accepted,
        trials,
        seed: config.seed,
    })
}

/// First `count` transcripts, in trial order.
pub fn transcripts(
    config: &ProtocolConfig,
    strategy: &AdversaryStrategy,
    count: u64,
) -> Result<Vec<SessionTranscript>, ProtocolError> {
    config.validate()?;
    (0..count).into_par_iter().map(|t| run_trial(config, strategy, t)).collect()
}

/// One JSON object per line.
pub fn write_json_lines<W: Write>(mut out: W, sessions: &[SessionTranscript]) -> std::io::Result<()> {
    for s in sessions {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Number of the `2^n` challenge strings on which fixed `replies` are
/// accepted (timing ignored), for the labels and edge labels of `g`.
pub fn accepting_challenge_count(g: &LabeledDigraph, start: VertexId, replies: &[u8]) -> u64 {
    let n = replies.len();
    assert!(n < 64, "exhaustive over 2^n challenges");
    (0..1u64 << n)
        .filter(|mask| {
            let mut v = start;
            (0..n).all(|i| match g.follow(v, ((mask >> i) & 1) as u8) {
                Some(w) => {
                    v = w;
                    g.label(w).index() as u8 == replies[i]
                }
                None => false,
            })
        })
        .count() as u64
}
