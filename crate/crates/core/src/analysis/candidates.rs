use crate::formula::Var;
use crate::sat::{Model, SatError, SatOutcome, SolverSession};

use super::AnalysisError;

/// Which test produced a refutation witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Witness of `F ∧ v ∧ ¬u`.
    Positive,
    /// Witness of `F ∧ ¬v ∧ u`.
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairVerdict {
    Confirmed,
    Refuted { witness: Model, direction: Direction },
}

/// Tests whether `u` always takes the same value as `v`. Both must be
/// neither core nor dead; `v == u` is rejected by the session as a
/// contradictory assumption.
pub fn verify_pair(session: &mut SolverSession, v: Var, u: Var) -> Result<PairVerdict, SatError> {
    if let SatOutcome::Satisfiable(witness) = session.check(&[v.positive(), u.negative()])? {
        return Ok(PairVerdict::Refuted { witness, direction: Direction::Positive });
    }
    if let SatOutcome::Satisfiable(witness) = session.check(&[v.negative(), u.positive()])? {
        return Ok(PairVerdict::Refuted { witness, direction: Direction::Negative });
    }
    Ok(PairVerdict::Confirmed)
}

/// Variables that may share an atomic set with `pivot`: true in a model with
/// the pivot true and false in a model with the pivot false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pivot: Var,
    members: Vec<Var>,
}

impl CandidateSet {
    pub fn from_certificates(pivot: Var, pos: &Model, neg: &Model) -> Result<CandidateSet, AnalysisError> {
        if pos.var_count() != neg.var_count() || pivot.index() > pos.var_count() {
            return Err(AnalysisError::CertificateMismatch(format!(
                "models over {} and {} variables for pivot {pivot}",
                pos.var_count(),
                neg.var_count()
            )));
        }
        if !pos.value(pivot) || neg.value(pivot) {
            return Err(AnalysisError::CertificateMismatch(format!(
                "certificates do not fix pivot {pivot} to true and false respectively"
            )));
        }
        let members = pos
            .values()
            .iter()
            .zip(neg.values())
            .enumerate()
            .filter(|(_, (&p, &n))| p && !n)
            .map(|(i, _)| Var::from_slot(i))
            .collect();
        Ok(CandidateSet { pivot, members })
    }

    pub fn pivot(&self) -> Var {
        self.pivot
    }

    /// Sorted ascending.
    pub fn members(&self) -> &[Var] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, var: Var) -> bool {
        self.members.binary_search(&var).is_ok()
    }

    /// Removes `var` unless it is the pivot.
    pub fn remove(&mut self, var: Var) -> bool {
        if var == self.pivot {
            return false;
        }
        match self.members.binary_search(&var) {
            Ok(i) => {
                self.members.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    /// Drops every candidate the witness shows to differ from the pivot.
    /// Returns how many were removed.
    pub fn prune_with_refutation(&mut self, witness: &Model, direction: Direction) -> usize {
        // The pivot is true in a positive witness and false in a negative one,
        // so the rule below never selects it; the explicit guard covers
        // malformed witnesses.
        let pivot = self.pivot;
        let before = self.members.len();
        self.members.retain(|&w| {
            let value = witness.value(w);
            w == pivot
                || match direction {
                    Direction::Positive => value,
                    Direction::Negative => !value,
                }
        });
        before - self.members.len()
    }

    /// Keeps only members of the sorted slice `keep` (and the pivot).
    fn intersect(&mut self, keep: &[Var]) -> usize {
        let pivot = self.pivot;
        let before = self.members.len();
        self.members.retain(|w| *w == pivot || keep.binary_search(w).is_ok());
        before - self.members.len()
    }
}

/// Remainder sets `R = C \ A` recorded after each pivot, indexed by member.
///
/// Every atomic set containing a member of `R` lies inside `R`, so a later
/// pivot's candidates can be intersected with every `R` it belongs to.
#[derive(Clone, Debug, Default)]
pub struct ConfinementIndex {
    remainders: Vec<Vec<Var>>,
    by_var: Vec<Vec<u32>>,
}

impl ConfinementIndex {
    pub fn new(var_count: u32) -> ConfinementIndex {
        ConfinementIndex { remainders: Vec::new(), by_var: vec![Vec::new(); var_count as usize] }
    }

    /// Records a remainder set. Empty sets carry no information and are skipped.
    pub fn record(&mut self, mut remainder: Vec<Var>) {
        if remainder.is_empty() {
            return;
        }
        remainder.sort_unstable();
        remainder.dedup();
        let id = self.remainders.len() as u32;
        for v in &remainder {
            self.by_var[v.slot()].push(id);
        }
        self.remainders.push(remainder);
    }

    pub fn remainders_of(&self, var: Var) -> impl Iterator<Item = &[Var]> {
        self.by_var[var.slot()].iter().map(|&id| self.remainders[id as usize].as_slice())
    }

    pub fn len(&self) -> usize {
        self.remainders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.remainders.is_empty()
    }

    /// Intersects `candidates` with every recorded remainder containing its
    /// pivot. Returns how many candidates were removed.
    pub fn apply(&self, candidates: &mut CandidateSet) -> usize {
        let mut removed = 0;
        for &id in &self.by_var[candidates.pivot().slot()] {
            removed += candidates.intersect(&self.remainders[id as usize]);
            if candidates.len() <= 1 {
                break;
            }
        }
        removed
    }
}
