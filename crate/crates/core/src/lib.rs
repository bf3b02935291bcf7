//! Atomic sets of CNF formulas computed with satisfiability queries only,
//! and equivalence-preserving atomic-set elimination.
//!
//! The pipeline: parse a formula ([`formula`]), analyse it with the
//! generate-and-test procedure ([`analysis::gnt_atomic_sets`]), then condense
//! atomic sets and propagate backbone constants ([`ase::eliminate`]).
//! [`oracle`] provides an enumeration-based ground truth for small inputs.

pub mod analysis;
pub mod ase;
pub mod formula;
pub mod oracle;
pub mod random;
pub mod sat;

pub use analysis::{gnt_atomic_sets, AtomicSet, AtomicSetKind, AtomicSetReport, BackboneResult, GntOptions};
pub use ase::{eliminate, VariableFate, VariableMap};
pub use formula::{parse_dimacs, write_dimacs, CnfFormula, Lit, Var};
pub use sat::{SolverKind, SolverSession};

#[cfg(test)]
pub(crate) mod test_support {
    use crate::formula::{parse_dimacs, CnfFormula};

    pub const EXAMPLE: &str = include_str!("../tests/fixtures/example.cnf");

    pub fn example() -> CnfFormula {
        parse_dimacs(EXAMPLE).unwrap()
    }

    /// Every satisfying assignment, by brute force.
    pub fn all_models(f: &CnfFormula) -> Vec<Vec<bool>> {
        let n = f.var_count() as usize;
        (0u64..1 << n)
            .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|values| f.is_satisfied_by(values))
            .collect()
    }
}
