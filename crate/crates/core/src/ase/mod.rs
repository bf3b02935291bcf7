//! Atomic-set elimination: condense every atomic set onto one representative,
//! fix backbone variables, propagate units, drop duplicate clauses and
//! renumber the survivors. The resulting formula has the same models as the
//! input, up to the returned [`VariableMap`].

mod propagate;
mod varmap;

pub use propagate::{unit_propagate, Propagation};
pub use varmap::{MapError, Resolved, VariableFate, VariableMap};

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::analysis::AtomicSetReport;
use crate::formula::{normalize_clause, Clause, CnfFormula, Lit, Normalized, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EliminationError {
    #[error("unit propagation derived the empty clause; the report does not match a satisfiable formula")]
    Conflict,
    #[error("report does not match formula: {0}")]
    ReportMismatch(String),
    #[error("representative map is not a projection: {var} maps to {target}, which maps to {next}")]
    NotAProjection { var: Var, target: Var, next: Var },
    #[error("clause references variable {0}, which is not in the surviving set")]
    NonSurvivingVariable(Var),
}

/// Rewrites every literal over a mapped variable to the same-polarity literal
/// of its representative, renormalizing the clauses. Unmapped variables map
/// to themselves.
pub fn substitute(formula: &CnfFormula, representative_of: &BTreeMap<Var, Var>) -> Result<CnfFormula, EliminationError> {
    for (&var, &target) in representative_of {
        if let Some(&next) = representative_of.get(&target) {
            if next != target {
                return Err(EliminationError::NotAProjection { var, target, next });
            }
        }
        if target.index() > formula.var_count() || var.index() > formula.var_count() {
            return Err(EliminationError::ReportMismatch(format!("variable {var} or {target} out of range")));
        }
    }
    let map = |l: Lit| match representative_of.get(&l.var()) {
        Some(&rep) => Lit::new(rep, l.is_positive()),
        None => l,
    };
    let mut clauses = Vec::with_capacity(formula.clause_count());
    for c in formula.clauses() {
        match normalize_clause(c.iter().map(map)).expect("clauses are non-empty") {
            Normalized::Clause(c) => clauses.push(c),
            Normalized::Tautology => {}
        }
    }
    Ok(CnfFormula::from_clauses(formula.var_count(), clauses)
        .expect("representatives are in range")
        .with_names(formula.names().clone()))
}

/// Renumbers `surviving` to `1..=|surviving|` in ascending order, carrying
/// names along. Returns the renumbered formula and the old→new map.
pub fn compact(formula: &CnfFormula, surviving: &BTreeSet<Var>) -> Result<(CnfFormula, BTreeMap<Var, Var>), EliminationError> {
    let renumber: BTreeMap<Var, Var> =
        surviving.iter().enumerate().map(|(i, &v)| (v, Var::from_slot(i))).collect();
    let mut clauses = Vec::with_capacity(formula.clause_count());
    for c in formula.clauses() {
        let mut lits = Vec::with_capacity(c.len());
        for l in c.iter() {
            let new = renumber.get(&l.var()).ok_or(EliminationError::NonSurvivingVariable(l.var()))?;
            lits.push(Lit::new(*new, l.is_positive()));
        }
        // order-preserving renumbering keeps the clause normalized
        clauses.push(Clause::from_normalized(lits));
    }
    let names = formula
        .names()
        .iter()
        .filter_map(|(v, n)| renumber.get(v).map(|&nv| (nv, n.clone())))
        .collect();
    let out = CnfFormula::from_clauses(surviving.len() as u32, clauses)
        .expect("renumbered into range")
        .with_names(names);
    Ok((out, renumber))
}

/// Full elimination pipeline. The representative of each regular atomic set
/// is its smallest member.
pub fn eliminate(formula: &CnfFormula, report: &AtomicSetReport) -> Result<(CnfFormula, VariableMap), EliminationError> {
    let n = formula.var_count();
    let in_range = |v: &Var| v.index() <= n;
    let mut claimed = vec![false; n as usize];
    let mut claim = |v: Var| -> Result<(), EliminationError> {
        if !in_range(&v) {
            return Err(EliminationError::ReportMismatch(format!("variable {v} beyond {n}")));
        }
        if std::mem::replace(&mut claimed[v.slot()], true) {
            return Err(EliminationError::ReportMismatch(format!("variable {v} reported twice")));
        }
        Ok(())
    };
    for &v in report.backbone.core.iter().chain(&report.backbone.dead) {
        claim(v)?;
    }

    let mut representative_of = BTreeMap::new();
    for set in report.regular_sets() {
        let rep = *set.members.iter().min().ok_or_else(|| EliminationError::ReportMismatch("empty set".into()))?;
        for &m in &set.members {
            claim(m)?;
            if m != rep {
                representative_of.insert(m, rep);
            }
        }
    }

    let substituted = substitute(formula, &representative_of)?;
    let mut constants: BTreeMap<Var, bool> = BTreeMap::new();
    constants.extend(report.backbone.core.iter().map(|&v| (v, true)));
    constants.extend(report.backbone.dead.iter().map(|&v| (v, false)));
    let (propagated, constants) = match unit_propagate(&substituted, &constants) {
        Propagation::Fixpoint { formula, constants } => (formula, constants),
        Propagation::Conflict => return Err(EliminationError::Conflict),
    };

    let mut seen = HashSet::with_capacity(propagated.clause_count());
    let unique: Vec<Clause> = propagated.clauses().iter().filter(|c| seen.insert(*c)).cloned().collect();
    let deduplicated = CnfFormula::from_clauses(n, unique)
        .expect("same variables")
        .with_names(propagated.names().clone());

    let surviving: BTreeSet<Var> = formula
        .vars()
        .filter(|v| !constants.contains_key(v) && !representative_of.contains_key(v))
        .collect();
    let (reduced, renumber) = compact(&deduplicated, &surviving)?;

    let fates = formula
        .vars()
        .map(|v| {
            if let Some(&b) = constants.get(&v) {
                if b {
                    VariableFate::ConstTrue
                } else {
                    VariableFate::ConstFalse
                }
            } else if let Some(&rep) = representative_of.get(&v) {
                VariableFate::MergedInto(rep)
            } else {
                VariableFate::Kept(renumber[&v])
            }
        })
        .collect();
    let map = VariableMap::new(fates, reduced.var_count()).expect("constructed consistently");
    Ok((reduced, map))
}
