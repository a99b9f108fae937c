use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::graph::{Label, LabeledDigraph};

/// Keyed bit stream for one session.
///
/// The seed is `SHA-256(len(K) || K || len(N_V) || N_V || len(N_P) || N_P)`
/// with 8-byte little-endian lengths; bits are drawn with `Rng::gen::<bool>`
/// from a `ChaCha20Rng` seeded with that digest.
pub fn session_stream(key: &[u8], nonce_v: &[u8], nonce_p: &[u8]) -> ChaCha20Rng {
    let mut h = Sha256::new();
    for part in [key, nonce_v, nonce_p] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    ChaCha20Rng::from_seed(h.finalize().into())
}

/// Labels the structure of `g` from the session stream: one bit per vertex
/// in ascending id order for `l_V`, then one bit per out-degree-2 vertex in
/// ascending order saying which out-edge gets label 0 (bit 0: the first).
/// A lone out-edge is labelled 0.
pub fn label_graph_from_prf(g: &LabeledDigraph, key: &[u8], nonce_v: &[u8], nonce_p: &[u8]) -> LabeledDigraph {
    assert!(g.alphabet().is_binary(), "protocol graphs are binary");
    assert!(g.max_out_degree() <= 2, "protocol graphs have out-degree at most 2");
    let mut rng = session_stream(key, nonce_v, nonce_p);
    let labels: Vec<Label> = (0..g.vertex_count()).map(|_| Label::bit(rng.gen())).collect();
    let edge_labels: Vec<Vec<Option<u8>>> = (0..g.vertex_count())
        .map(|v| match g.out_degree(v) {
            0 => Vec::new(),
            1 => vec![Some(0)],
            _ => {
                let swap = rng.gen::<bool>() as u8;
                vec![Some(swap), Some(1 - swap)]
            }
        })
        .collect();
    g.relabeled(labels)
        .and_then(|r| r.with_edge_labels(&edge_labels))
        .expect("structure is unchanged and labels are binary")
}
