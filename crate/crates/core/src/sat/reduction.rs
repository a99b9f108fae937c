//! Reduction from CNF satisfiability to Binary MFS.
//!
//! Layout of the produced graph, in vertex-id order:
//! - a binary tree from the root whose `m` leaves `c_1..c_m` all sit at depth
//!   `d = ceil(log2 m)` (for `m = 1` the root is `c_1`);
//! - the shared backbone `u_0^j, v_0^j` for `j = 2..n`, each pair fully
//!   wired to the next;
//! - per clause `i`, the lane `u_i^j, v_i^j` for `j = 1..n-1`.
//!
//! In lane `j`, `u_i^j` jumps to the backbone when `x_j` is in `c_i` and
//! `v_i^j` jumps when `~x_j` is; otherwise the vertex continues to the next
//! lane pair. Lane pair `n` is never created, so non-jumping exits at
//! `j = n-1` dead-end unless `x_n` (to `u_0^n`) or `~x_n` (to `v_0^n`) is in
//! the clause. Every `v` vertex is labelled 0, everything else 1.

use std::fmt;

use serde::Serialize;

use super::cnf::CnfFormula;
use crate::graph::{Alphabet, GraphBuilder, Label, LabeledDigraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Role {
    Root,
    TreeInternal,
    ClauseLeaf { clause: usize },
    LaneU { clause: usize, variable: u32 },
    LaneV { clause: usize, variable: u32 },
    SharedU { variable: u32 },
    SharedV { variable: u32 },
}

impl Role {
    /// Label assigned by the reduction.
    pub fn label(self) -> Label {
        match self {
            Role::LaneV { .. } | Role::SharedV { .. } => Label::ZERO,
            _ => Label::ONE,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Role::Root => write!(f, "root"),
            Role::TreeInternal => write!(f, "tree"),
            Role::ClauseLeaf { clause } => write!(f, "c_{clause}"),
            Role::LaneU { clause, variable } => write!(f, "u_{clause}^{variable}"),
            Role::LaneV { clause, variable } => write!(f, "v_{clause}^{variable}"),
            Role::SharedU { variable } => write!(f, "u_0^{variable}"),
            Role::SharedV { variable } => write!(f, "v_0^{variable}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReductionParams {
    pub variables: u32,
    pub clauses: usize,
    /// `ceil(log2 m)`, the depth of the clause leaves.
    pub depth: u32,
    /// `n + 1 + depth`: vertices in a longest walk from the root.
    pub target_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutput {
    pub graph: LabeledDigraph,
    pub roles: Vec<Role>,
    pub params: ReductionParams,
}

impl ReductionOutput {
    pub const ROOT: VertexId = 0;

    pub fn find(&self, role: Role) -> Option<VertexId> {
        self.roles.iter().position(|&r| r == role)
    }

    pub fn role(&self, v: VertexId) -> Role {
        self.roles[v]
    }
}

/// Leftmost-`m`-leaves slice of the complete binary tree of depth
/// `ceil(log2 m)`, numbered breadth-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafTree {
    pub depth: u32,
    pub vertex_count: usize,
    pub edges: Vec<(VertexId, VertexId)>,
    /// `leaves[i]` is `c_(i+1)`.
    pub leaves: Vec<VertexId>,
}

pub fn ceil_log2(m: usize) -> u32 {
    assert!(m >= 1, "ceil_log2 of zero");
    usize::BITS - (m - 1).leading_zeros()
}

pub fn build_leaf_tree(m: usize) -> LeafTree {
    let depth = ceil_log2(m);
    // Level l keeps positions 0..ceil(m / 2^(depth - l)).
    let width = |l: u32| m.div_ceil(1usize << (depth - l));
    let mut level_start = Vec::with_capacity(depth as usize + 1);
    let mut next = 0;
    for l in 0..=depth {
        level_start.push(next);
        next += width(l);
    }
    let mut edges = Vec::new();
    for l in 0..depth {
        for pos in 0..width(l) {
            for child in [2 * pos, 2 * pos + 1] {
                if child < width(l + 1) {
                    edges.push((level_start[l as usize] + pos, level_start[l as usize + 1] + child));
                }
            }
        }
    }
    let leaves = (0..m).map(|i| level_start[depth as usize] + i).collect();
    LeafTree { depth, vertex_count: next, edges, leaves }
}

pub fn reduce_sat_to_mfs(f: &CnfFormula) -> ReductionOutput {
    let n = f.variable_count();
    let m = f.clause_count();
    let tree = build_leaf_tree(m);

    let mut roles = vec![Role::TreeInternal; tree.vertex_count];
    roles[0] = Role::Root;
    for (i, &leaf) in tree.leaves.iter().enumerate() {
        roles[leaf] = Role::ClauseLeaf { clause: i + 1 };
    }
    let shared = |j: u32| tree.vertex_count + 2 * (j as usize - 2);
    for j in 2..=n {
        roles.push(Role::SharedU { variable: j });
        roles.push(Role::SharedV { variable: j });
    }
    let lanes_start = roles.len();
    let lane = |i: usize, j: u32| lanes_start + 2 * ((i - 1) * (n as usize - 1) + (j as usize - 1));
    for i in 1..=m {
        for j in 1..n {
            roles.push(Role::LaneU { clause: i, variable: j });
            roles.push(Role::LaneV { clause: i, variable: j });
        }
    }

    let mut b = GraphBuilder::new(Alphabet::binary());
    for r in &roles {
        b.add_vertex(r.label());
    }
    for &(p, c) in &tree.edges {
        b.add_edge_once(p, c);
    }
    for k in 2..n {
        for from in [shared(k), shared(k) + 1] {
            b.add_edge_once(from, shared(k + 1));
            b.add_edge_once(from, shared(k + 1) + 1);
        }
    }
    for (idx, clause) in f.clauses().iter().enumerate() {
        let i = idx + 1;
        let leaf = tree.leaves[idx];
        b.add_edge_once(leaf, lane(i, 1));
        b.add_edge_once(leaf, lane(i, 1) + 1);
        for j in 1..n {
            let (u, v) = (lane(i, j), lane(i, j) + 1);
            let jump_u = clause.contains(j, true);
            let jump_v = !jump_u && clause.contains(j, false);
            for (from, jump) in [(u, jump_u), (v, jump_v)] {
                if jump {
                    b.add_edge_once(from, shared(j + 1));
                    b.add_edge_once(from, shared(j + 1) + 1);
                } else if j + 1 < n {
                    b.add_edge_once(from, lane(i, j + 1));
                    b.add_edge_once(from, lane(i, j + 1) + 1);
                }
            }
        }
        let (u, v) = (lane(i, n - 1), lane(i, n - 1) + 1);
        if clause.contains(n, true) {
            b.add_edge_once(u, shared(n));
            b.add_edge_once(v, shared(n));
        }
        if clause.contains(n, false) {
            b.add_edge_once(u, shared(n) + 1);
            b.add_edge_once(v, shared(n) + 1);
        }
    }
    let graph = b.build().expect("reduction wiring stays in range");
    let params = ReductionParams {
        variables: n,
        clauses: m,
        depth: tree.depth,
        target_length: n as usize + 1 + tree.depth as usize,
    };
    ReductionOutput { graph, roles, params }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_binary_instance;

    #[test]
    fn leaf_trees() {
        let t = build_leaf_tree(1);
        assert_eq!((t.depth, t.vertex_count, t.leaves.clone()), (0, 1, vec![0]));
        assert!(t.edges.is_empty());

        let t = build_leaf_tree(3);
        assert_eq!(t.depth, 2);
        assert_eq!(t.edges, vec![(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)]);
        assert_eq!(t.leaves, vec![3, 4, 5]);

        let t = build_leaf_tree(4);
        assert_eq!((t.depth, t.vertex_count), (2, 7));

        for m in 1..=40 {
            let t = build_leaf_tree(m);
            assert_eq!(t.leaves.len(), m);
            assert_eq!(t.depth, ceil_log2(m));
            let mut outdeg = vec![0; t.vertex_count];
            for &(p, _) in &t.edges {
                outdeg[p] += 1;
            }
            assert!(outdeg.iter().all(|&d| d <= 2));
            assert!(t.leaves.iter().all(|&l| outdeg[l] == 0));
            // Only leaves are childless, so every leaf is at full depth.
            assert_eq!(outdeg.iter().filter(|&&d| d == 0).count(), m);
            assert_eq!(t.edges.len(), t.vertex_count - 1);
        }
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!([1, 2, 3, 4, 5, 8, 9].map(ceil_log2), [0, 1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn single_clause_two_variables() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        let r = reduce_sat_to_mfs(&f);
        let g = &r.graph;
        assert_eq!(r.params.target_length, 3);
        assert_eq!(r.role(0), Role::ClauseLeaf { clause: 1 });
        let u11 = r.find(Role::LaneU { clause: 1, variable: 1 }).unwrap();
        let v11 = r.find(Role::LaneV { clause: 1, variable: 1 }).unwrap();
        let u02 = r.find(Role::SharedU { variable: 2 }).unwrap();
        let v02 = r.find(Role::SharedV { variable: 2 }).unwrap();
        assert_eq!(g.successors(0).collect::<Vec<_>>(), vec![u11, v11]);
        assert_eq!(g.successors(u11).collect::<Vec<_>>(), vec![u02, v02]);
        // v_1^1 would continue in-lane to the removed pair, then x2 attaches it.
        assert_eq!(g.successors(v11).collect::<Vec<_>>(), vec![u02]);
        assert_eq!(g.vertex_count(), 5);
        assert!(validate_binary_instance(g).is_ok());
    }

    #[test]
    fn three_clause_example_matches_hand_transcription() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, -2], &[2, -3], &[-1, -2, -3]]).unwrap();
        let r = reduce_sat_to_mfs(&f);
        assert_eq!(r.graph.vertex_count(), 22);
        assert_eq!((r.params.depth, r.params.target_length), (2, 6));
        let name = |v: VertexId| r.role(v).to_string();
        let expected: &[(&str, &[&str])] = &[
            ("root", &["tree", "tree"]),
            ("c_1", &["u_1^1", "v_1^1"]),
            ("u_1^1", &["u_0^2", "v_0^2"]),
            ("v_1^1", &["u_1^2", "v_1^2"]),
            ("u_1^2", &[]),
            ("v_1^2", &["u_0^3", "v_0^3"]),
            ("u_2^1", &["u_2^2", "v_2^2"]),
            ("v_2^1", &["u_2^2", "v_2^2"]),
            ("u_2^2", &["u_0^3", "v_0^3"]),
            ("v_2^2", &["v_0^3"]),
            ("u_3^1", &["u_3^2", "v_3^2"]),
            ("v_3^1", &["u_0^2", "v_0^2"]),
            ("u_3^2", &["v_0^3"]),
            ("v_3^2", &["u_0^3", "v_0^3"]),
            ("u_0^2", &["u_0^3", "v_0^3"]),
            ("v_0^2", &["u_0^3", "v_0^3"]),
            ("u_0^3", &[]),
            ("v_0^3", &[]),
        ];
        for (from, to) in expected {
            let v = (0..r.graph.vertex_count()).find(|&v| name(v) == *from).unwrap();
            let mut got: Vec<String> = r.graph.successors(v).map(name).collect();
            got.sort();
            let mut want: Vec<String> = to.iter().map(|s| s.to_string()).collect();
            want.sort();
            assert_eq!(got, want, "successors of {from}");
        }
    }

    #[test]
    fn labels_follow_roles() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, -2], &[2, -3], &[-1, -2, -3]]).unwrap();
        let r = reduce_sat_to_mfs(&f);
        for (v, role) in r.roles.iter().enumerate() {
            let zero = matches!(role, Role::LaneV { .. } | Role::SharedV { .. });
            assert_eq!(r.graph.label(v) == Label::ZERO, zero, "{role}");
            assert!(!matches!(role, Role::LaneU { variable: 3, .. } | Role::LaneV { variable: 3, .. }));
        }
        assert_eq!(Role::LaneU { clause: 2, variable: 1 }.to_string(), "u_2^1");
    }
}
