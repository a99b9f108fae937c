//! CNF formulas, the SAT-to-Binary-MFS reduction and its empirical checks.

mod cnf;
mod reduction;
mod verify;

use thiserror::Error;

pub use cnf::{parse_dimacs, Clause, CnfError, CnfFormula, Literal};
pub use reduction::{build_leaf_tree, ceil_log2, reduce_sat_to_mfs, LeafTree, ReductionOutput, ReductionParams, Role};
pub use verify::{
    check_walk_lengths, extract_assignment, max_target_multiplicity, verify_reduction, verify_reduction_output,
    ExtractError, ReductionVerdict, WalkLengthVerdict,
};

use crate::graph::GraphDocument;

pub const MAX_BRUTE_SAT_VARIABLES: u32 = 24;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("brute-force SAT supports at most {limit} variables, formula has {variables}")]
pub struct TooManyVariables {
    pub variables: u32,
    pub limit: u32,
}

/// Exhaustive search over all `2^n` assignments; returns the first
/// satisfying one in binary-counting order (`x_1` is the high bit).
pub fn brute_force_sat(f: &CnfFormula) -> Result<Option<Vec<bool>>, TooManyVariables> {
    let n = f.variable_count();
    if n > MAX_BRUTE_SAT_VARIABLES {
        return Err(TooManyVariables { variables: n, limit: MAX_BRUTE_SAT_VARIABLES });
    }
    let mut assignment = vec![false; n as usize];
    for mask in 0u32..1 << n {
        for (j, a) in assignment.iter_mut().enumerate() {
            *a = (mask >> (n as usize - 1 - j)) & 1 == 1;
        }
        if f.eval(&assignment) {
            return Ok(Some(assignment));
        }
    }
    Ok(None)
}

/// Pigeonhole formula: `holes + 1` pigeons into `holes` holes; always
/// unsatisfiable. Variable `p * holes + h + 1` puts pigeon `p` in hole `h`.
pub fn pigeonhole(holes: u32) -> CnfFormula {
    assert!(holes >= 1, "pigeonhole needs a hole");
    let var = |p: u32, h: u32| Literal { variable: p * holes + h + 1, positive: true };
    let mut clauses: Vec<Vec<Literal>> = (0..=holes).map(|p| (0..holes).map(|h| var(p, h)).collect()).collect();
    for h in 0..holes {
        for p in 0..=holes {
            for q in p + 1..=holes {
                clauses.push(vec![Literal { positive: false, ..var(p, h) }, Literal { positive: false, ..var(q, h) }]);
            }
        }
    }
    CnfFormula::new((holes + 1) * holes, clauses).expect("pigeonhole clauses are valid")
}

/// Graph document for a reduction, with `roles` and `params` side tables.
pub fn reduction_document(r: &ReductionOutput) -> GraphDocument {
    let mut doc = GraphDocument::new(r.graph.clone());
    doc.names = r.roles.iter().enumerate().map(|(v, role)| (v, role.to_string())).collect();
    doc.extra.insert("roles".into(), serde_json::to_value(&r.roles).expect("roles serialize"));
    doc.extra.insert("params".into(), serde_json::to_value(r.params).expect("params serialize"));
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn brute_force_examples() {
        let f = CnfFormula::from_dimacs_clauses(3, &[&[1, -2], &[2, -3], &[-1, -2, -3]]).unwrap();
        let w = brute_force_sat(&f).unwrap().unwrap();
        assert!(f.eval(&w));
        assert!(f.eval(&[true, true, false]));

        let unsat = CnfFormula::from_dimacs_clauses(2, &[&[1], &[-1]]).unwrap();
        assert_eq!(brute_force_sat(&unsat).unwrap(), None);

        let wide = CnfFormula::from_dimacs_clauses(25, &[&[25]]).unwrap();
        assert_eq!(brute_force_sat(&wide), Err(TooManyVariables { variables: 25, limit: 24 }));
    }

    #[test]
    fn pigeonhole_is_unsat() {
        let f = pigeonhole(2);
        assert_eq!((f.variable_count(), f.clause_count()), (6, 9));
        assert_eq!(brute_force_sat(&f).unwrap(), None);
    }

    #[test]
    fn random_formulas_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let f = CnfFormula::random(&mut rng, 6, 6);
            assert!((2..=6).contains(&f.variable_count()));
            assert!((1..=6).contains(&f.clause_count()));
            assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
        }
    }

    #[test]
    fn document_carries_roles() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        let doc = reduction_document(&reduce_sat_to_mfs(&f));
        let v = doc.to_json_value();
        assert_eq!(v["roles"][0]["kind"], "clause-leaf");
        assert_eq!(v["params"]["target_length"], 3);
        assert_eq!(doc.names[&0], "c_1");
    }
}
