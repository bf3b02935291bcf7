use std::collections::BTreeMap;

use crate::formula::{Clause, CnfFormula, Lit, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    /// Simplified formula (same variable count) and every fixed variable,
    /// given or derived.
    Fixpoint { formula: CnfFormula, constants: BTreeMap<Var, bool> },
    /// The empty clause was derived.
    Conflict,
}

/// Assigns `constants`, then propagates unit clauses to fixpoint. Satisfied
/// clauses are dropped and false literals removed from the rest.
pub fn unit_propagate(formula: &CnfFormula, constants: &BTreeMap<Var, bool>) -> Propagation {
    let n = formula.var_count() as usize;
    let clauses = formula.clauses();
    let mut value: Vec<Option<bool>> = vec![None; n];
    let mut occurrences: Vec<Vec<u32>> = vec![Vec::new(); 2 * n];
    let code = |l: Lit| 2 * l.var().slot() + l.is_positive() as usize;
    for (ci, c) in clauses.iter().enumerate() {
        for l in c.iter() {
            occurrences[code(l)].push(ci as u32);
        }
    }
    let mut satisfied = vec![false; clauses.len()];
    let mut falsified = vec![0usize; clauses.len()];
    let mut queue: Vec<Lit> = Vec::new();

    let assign = |lit: Lit, value: &mut Vec<Option<bool>>, queue: &mut Vec<Lit>| -> bool {
        match value[lit.var().slot()] {
            Some(b) => b == lit.is_positive(),
            None => {
                value[lit.var().slot()] = Some(lit.is_positive());
                queue.push(lit);
                true
            }
        }
    };

    for (&v, &b) in constants {
        if v.slot() >= n {
            continue;
        }
        if !assign(Lit::new(v, b), &mut value, &mut queue) {
            return Propagation::Conflict;
        }
    }
    for c in clauses {
        if c.is_unit() && !assign(c.lits()[0], &mut value, &mut queue) {
            return Propagation::Conflict;
        }
    }

    let mut head = 0;
    while head < queue.len() {
        let lit = queue[head];
        head += 1;
        for &ci in &occurrences[code(lit)] {
            satisfied[ci as usize] = true;
        }
        for &ci in &occurrences[code(!lit)] {
            let ci = ci as usize;
            falsified[ci] += 1;
            if satisfied[ci] {
                continue;
            }
            let clause = &clauses[ci];
            if falsified[ci] == clause.len() {
                return Propagation::Conflict;
            }
            if falsified[ci] + 1 == clause.len() {
                // the remaining literal may be assigned but not yet dequeued
                if clause.iter().any(|l| value[l.var().slot()] == Some(l.is_positive())) {
                    continue;
                }
                match clause.iter().find(|l| value[l.var().slot()].is_none()) {
                    Some(unit) => {
                        assign(unit, &mut value, &mut queue);
                    }
                    None => return Propagation::Conflict,
                }
            }
        }
    }

    let remaining: Vec<Clause> = clauses
        .iter()
        .filter(|c| !c.iter().any(|l| value[l.var().slot()] == Some(l.is_positive())))
        .map(|c| Clause::from_normalized(c.iter().filter(|l| value[l.var().slot()].is_none()).collect()))
        .collect();
    let constants = value
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|b| (Var::from_slot(i), b)))
        .collect();
    let simplified = CnfFormula::from_clauses(formula.var_count(), remaining)
        .expect("variables unchanged")
        .with_names(formula.names().clone());
    Propagation::Fixpoint { formula: simplified, constants }
}
