//! Exhaustive-enumeration ground truth for small formulas.
//!
//! One pass over all `2^n` assignments yields the model count, per-variable
//! cardinalities and the truth-column equivalence classes. Nothing here uses
//! the SAT engine.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::analysis::{AtomicSetReport, BackboneResult, QueryStats};
use crate::ase::{Resolved, VariableMap};
use crate::formula::{CnfFormula, Var};

pub const DEFAULT_LIMIT: u32 = 25;

/// Hard ceiling imposed by the bitmask representation.
const MAX_SUPPORTED: u32 = 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("formula has {var_count} variables, above the enumeration limit of {limit}")]
    OverLimit { var_count: u32, limit: u32 },
    #[error("formula is unsatisfiable")]
    Unsatisfiable,
    #[error("malformed variable map: {0}")]
    MalformedMap(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationResult {
    pub var_count: u32,
    pub model_count: u64,
    /// Number of models in which each variable is true, indexed by slot.
    pub cardinalities: Vec<u64>,
}

impl EnumerationResult {
    pub fn cardinality(&self, var: Var) -> u64 {
        self.cardinalities[var.slot()]
    }
}

struct Scan {
    result: EnumerationResult,
    /// `differs[x]` has bit `y` set when some model gives `x` and `y` different values.
    differs: Vec<u32>,
}

/// Clauses as bitmasks; a clause is satisfied by `a` iff
/// `a & pos != 0 || !a & neg != 0`.
fn clause_masks(formula: &CnfFormula) -> Vec<(u32, u32)> {
    formula
        .clauses()
        .iter()
        .map(|c| {
            c.iter().fold((0u32, 0u32), |(p, n), l| {
                let bit = 1u32 << l.var().slot();
                if l.is_positive() {
                    (p | bit, n)
                } else {
                    (p, n | bit)
                }
            })
        })
        .collect()
}

fn check_limit(formula: &CnfFormula, limit: u32) -> Result<(), OracleError> {
    let limit = limit.min(MAX_SUPPORTED);
    if formula.var_count() > limit {
        return Err(OracleError::OverLimit { var_count: formula.var_count(), limit });
    }
    Ok(())
}

fn scan(formula: &CnfFormula, limit: u32, track_columns: bool) -> Result<Scan, OracleError> {
    check_limit(formula, limit)?;
    let n = formula.var_count() as usize;
    let mut masks = clause_masks(formula);
    // shorter clauses first: they reject more assignments early
    masks.sort_by_key(|(p, q)| (p | q).count_ones());
    let full: u32 = if n == 0 { 0 } else { u32::MAX >> (32 - n) };
    let mut count = 0u64;
    let mut cardinalities = vec![0u64; n];
    let mut differs = vec![0u32; n];
    for a in 0..=full as u64 {
        let a = a as u32;
        if !masks.iter().all(|&(p, q)| a & p != 0 || !a & q != 0) {
            continue;
        }
        count += 1;
        for (i, card) in cardinalities.iter_mut().enumerate() {
            let bit = a >> i & 1;
            *card += bit as u64;
            if track_columns {
                // variables whose value differs from variable i in this model
                differs[i] |= if bit == 1 { !a } else { a } & full;
            }
        }
        if n == 0 {
            break;
        }
    }
    Ok(Scan {
        result: EnumerationResult { var_count: n as u32, model_count: count, cardinalities },
        differs,
    })
}

/// Model count and cardinalities over all `2^var_count` assignments;
/// variables absent from every clause are counted too.
pub fn enumerate(formula: &CnfFormula, limit: u32) -> Result<EnumerationResult, OracleError> {
    scan(formula, limit, false).map(|s| s.result)
}

/// Atomic sets as equivalence classes of truth columns across all models.
pub fn oracle_atomic_sets(formula: &CnfFormula, limit: u32) -> Result<AtomicSetReport, OracleError> {
    let scan = scan(formula, limit, true)?;
    let result = &scan.result;
    if result.model_count == 0 {
        return Err(OracleError::Unsatisfiable);
    }
    let n = result.var_count as usize;
    let mut backbone = BackboneResult::default();
    let mut regular = Vec::new();
    let mut assigned = vec![false; n];
    for (i, &card) in result.cardinalities.iter().enumerate() {
        let var = Var::from_slot(i);
        if card == result.model_count {
            backbone.core.insert(var);
            assigned[i] = true;
        } else if card == 0 {
            backbone.dead.insert(var);
            assigned[i] = true;
        }
    }
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let class: Vec<Var> = (i..n)
            .filter(|&j| !assigned[j] && scan.differs[i] >> j & 1 == 0)
            .map(Var::from_slot)
            .collect();
        for v in &class {
            assigned[v.slot()] = true;
        }
        regular.push(class);
    }
    Ok(AtomicSetReport::from_parts(backbone, regular, QueryStats::default()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnosis {
    CountMismatch { original: u64, reduced: u64 },
    CardinalityMismatch { var: Var, original: u64, reduced: u64 },
}

impl std::fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnosis::CountMismatch { original, reduced } => {
                write!(f, "model count changed: {original} before, {reduced} after")
            }
            Diagnosis::CardinalityMismatch { var, original, reduced } => {
                write!(f, "cardinality of variable {var} changed: {original} before, {reduced} after")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Pass,
    Fail(Diagnosis),
}

impl Verification {
    pub fn passed(&self) -> bool {
        matches!(self, Verification::Pass)
    }
}

/// Checks that `reduced` has the same model count as `original`, and that
/// each original variable's cardinality is preserved under `map`.
pub fn verify_elimination(
    original: &CnfFormula,
    reduced: &CnfFormula,
    map: &VariableMap,
    limit: u32,
) -> Result<Verification, OracleError> {
    if map.old_var_count() != original.var_count() || map.new_var_count() != reduced.var_count() {
        return Err(OracleError::MalformedMap(format!(
            "map is {} -> {}, formulas are {} -> {}",
            map.old_var_count(),
            map.new_var_count(),
            original.var_count(),
            reduced.var_count()
        )));
    }
    let before = enumerate(original, limit)?;
    let after = enumerate(reduced, limit)?;
    if before.model_count != after.model_count {
        return Ok(Verification::Fail(Diagnosis::CountMismatch {
            original: before.model_count,
            reduced: after.model_count,
        }));
    }
    for var in original.vars() {
        let expected = match map.resolve(var) {
            Resolved::Var(k) => after.cardinality(k),
            Resolved::Const(true) => after.model_count,
            Resolved::Const(false) => 0,
        };
        if before.cardinality(var) != expected {
            return Ok(Verification::Fail(Diagnosis::CardinalityMismatch {
                var,
                original: before.cardinality(var),
                reduced: expected,
            }));
        }
    }
    Ok(Verification::Pass)
}

/// Variables grouped by class, for tests that compare partitions directly.
pub fn partition(report: &AtomicSetReport) -> BTreeSet<Vec<Var>> {
    report.sets.iter().map(|s| s.members.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{AtomicSet, AtomicSetKind};
    use crate::ase::eliminate;
    use crate::formula::parse_dimacs;
    use crate::test_support::{all_models, example};
    use crate::{gnt_atomic_sets, GntOptions};

    #[test]
    fn example_counts() {
        let r = enumerate(&example(), DEFAULT_LIMIT).unwrap();
        assert_eq!(r.model_count, 2);
        assert_eq!(r.cardinalities, vec![2, 2, 1, 1, 1]);
    }

    #[test]
    fn unconstrained_and_unsat() {
        let f = CnfFormula::new(3, Vec::<Vec<i32>>::new()).unwrap();
        let r = enumerate(&f, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.model_count, 8);
        assert_eq!(r.cardinalities, vec![4, 4, 4]);

        let f = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert_eq!(enumerate(&f, DEFAULT_LIMIT).unwrap().model_count, 0);
        assert_eq!(oracle_atomic_sets(&f, DEFAULT_LIMIT).unwrap_err(), OracleError::Unsatisfiable);

        let empty = CnfFormula::default();
        assert_eq!(enumerate(&empty, DEFAULT_LIMIT).unwrap().model_count, 1);
    }

    #[test]
    fn limit_enforced() {
        let f = CnfFormula::new(26, Vec::<Vec<i32>>::new()).unwrap();
        assert_eq!(
            enumerate(&f, DEFAULT_LIMIT).unwrap_err(),
            OracleError::OverLimit { var_count: 26, limit: 25 }
        );
        assert!(enumerate(&f, 10).is_err());
    }

    #[test]
    fn unreferenced_variables_double_the_count() {
        let f = parse_dimacs("p cnf 3 2\n1 2 0\n-1 -2 0\n").unwrap();
        let g = parse_dimacs("p cnf 5 2\n1 2 0\n-1 -2 0\n").unwrap();
        assert_eq!(enumerate(&g, 25).unwrap().model_count, 4 * enumerate(&f, 25).unwrap().model_count);
    }

    #[test]
    fn agrees_with_naive_model_listing() {
        let f = parse_dimacs("p cnf 6 6\n1 -2 3 0\n-1 4 0\n-4 -5 0\n2 5 6 0\n-6 1 0\n3 -4 0\n").unwrap();
        let models = all_models(&f);
        let r = enumerate(&f, 25).unwrap();
        assert_eq!(r.model_count, models.len() as u64);
        for i in 0..6 {
            assert_eq!(r.cardinalities[i], models.iter().filter(|m| m[i]).count() as u64);
        }
    }

    #[test]
    fn example_atomic_sets() {
        let report = oracle_atomic_sets(&example(), DEFAULT_LIMIT).unwrap();
        let vars = |xs: &[u32]| xs.iter().map(|&i| Var::new(i)).collect::<Vec<_>>();
        assert_eq!(
            report.sets,
            vec![
                AtomicSet { kind: AtomicSetKind::Core, members: vars(&[1, 2]) },
                AtomicSet { kind: AtomicSetKind::Regular, members: vars(&[3, 5]) },
            ]
        );
    }

    #[test]
    fn bi_implication_class() {
        let f = parse_dimacs("p cnf 2 2\n-1 2 0\n1 -2 0\n").unwrap();
        let report = oracle_atomic_sets(&f, DEFAULT_LIMIT).unwrap();
        assert_eq!(partition(&report).len(), 1);
        assert!(report.backbone.is_empty());
    }

    #[test]
    fn verification_of_example() {
        let f = example();
        let report = gnt_atomic_sets(&f, &GntOptions::default()).unwrap();
        let (reduced, map) = eliminate(&f, &report).unwrap();
        assert_eq!(verify_elimination(&f, &reduced, &map, DEFAULT_LIMIT).unwrap(), Verification::Pass);

        // an extra unit clause halves the model count
        let mut clauses: Vec<Vec<i32>> = reduced.clauses().iter().map(|c| c.to_dimacs()).collect();
        clauses.push(vec![1]);
        let tampered = CnfFormula::new(reduced.var_count(), clauses).unwrap();
        assert_eq!(
            verify_elimination(&f, &tampered, &map, DEFAULT_LIMIT).unwrap(),
            Verification::Fail(Diagnosis::CountMismatch { original: 2, reduced: 1 })
        );
    }

    #[test]
    fn swapped_map_fails_on_cardinality() {
        // 1 is true in 3 of 4 models, 2 in 2 of 4
        let f = parse_dimacs("p cnf 2 1\n1 -2 0\n").unwrap();
        let swapped = VariableMap::new(
            vec![crate::VariableFate::Kept(Var::new(2)), crate::VariableFate::Kept(Var::new(1))],
            2,
        )
        .unwrap();
        match verify_elimination(&f, &f, &swapped, 25).unwrap() {
            Verification::Fail(Diagnosis::CardinalityMismatch { var, .. }) => assert_eq!(var, Var::new(1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identity_elimination_passes() {
        let f = parse_dimacs("p cnf 3 2\n1 2 0\n-2 3 0\n").unwrap();
        let map = VariableMap::identity(3);
        assert!(verify_elimination(&f, &f, &map, 25).unwrap().passed());
        let wrong = VariableMap::identity(2);
        assert!(matches!(verify_elimination(&f, &f, &wrong, 25), Err(OracleError::MalformedMap(_))));
    }
}
