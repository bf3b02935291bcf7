//! Satisfiability queries under temporary assumptions.
//!
//! A [`SolverSession`] loads a formula once and answers repeated
//! [`SolverSession::check`] calls. Backends are swappable through
//! [`SatBackend`]; the session validates assumptions and totalizes models so
//! that every backend presents the same contract.

mod cdcl;
mod varisat_backend;

pub use cdcl::CdclSolver;
pub use varisat_backend::VarisatSolver;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::formula::{CnfFormula, Lit, Var};

/// A total truth assignment over `1..=var_count`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn from_values(values: Vec<bool>) -> Model {
        Model { values }
    }

    /// Builds a model from a (possibly partial) set of literals; unmentioned
    /// variables default to false.
    pub fn from_lits(var_count: u32, lits: impl IntoIterator<Item = Lit>) -> Model {
        let mut values = vec![false; var_count as usize];
        for l in lits {
            if let Some(slot) = values.get_mut(l.var().slot()) {
                *slot = l.is_positive();
            }
        }
        Model { values }
    }

    pub fn var_count(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn value(&self, var: Var) -> bool {
        self.values[var.slot()]
    }

    pub fn lit_value(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// Variables assigned true (S⁺).
    pub fn positives(&self) -> impl Iterator<Item = Var> + '_ {
        self.values.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| Var::from_slot(i))
    }

    /// Variables assigned false (S⁻).
    pub fn negatives(&self) -> impl Iterator<Item = Var> + '_ {
        self.values.iter().enumerate().filter(|(_, &b)| !b).map(|(i, _)| Var::from_slot(i))
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.values.iter().enumerate().map(|(i, &b)| Lit::new(Var::from_slot(i), b))
    }

    pub fn satisfies(&self, formula: &CnfFormula) -> bool {
        self.values.len() == formula.var_count() as usize && formula.is_satisfied_by(&self.values)
    }
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.lits()).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    Satisfiable(Model),
    Unsatisfiable,
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Satisfiable(_))
    }

    pub fn model(self) -> Option<Model> {
        match self {
            SatOutcome::Satisfiable(m) => Some(m),
            SatOutcome::Unsatisfiable => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("query on a disposed solver session")]
    SessionDisposed,
    #[error("contradictory assumptions on variable {0}")]
    ContradictoryAssumptions(Var),
    #[error("assumption {lit} references a variable beyond {var_count}")]
    AssumptionOutOfRange { lit: Lit, var_count: u32 },
    #[error("deadline reached during solving")]
    Interrupted,
    #[error("solver backend failure: {0}")]
    Backend(String),
}

/// What a backend reports for one query. Models may be partial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackendAnswer {
    Sat(Vec<Lit>),
    Unsat,
}

/// A complete solver that can be queried repeatedly under assumptions.
///
/// Assumptions must not be retained between calls.
pub trait SatBackend {
    fn solve(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> Result<BackendAnswer, SatError>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SolverKind {
    /// Built-in CDCL solver.
    #[default]
    Cdcl,
    /// The `varisat` crate.
    Varisat,
}

impl SolverKind {
    pub const ALL: [SolverKind; 2] = [SolverKind::Cdcl, SolverKind::Varisat];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Cdcl => "cdcl",
            SolverKind::Varisat => "varisat",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cdcl" => Ok(SolverKind::Cdcl),
            "varisat" => Ok(SolverKind::Varisat),
            other => Err(format!("unknown solver `{other}` (expected one of: cdcl, varisat)")),
        }
    }
}

/// A loaded formula answering satisfiability queries. Single consumer.
pub struct SolverSession {
    backend: Option<Box<dyn SatBackend>>,
    var_count: u32,
    calls: u64,
    deadline: Option<Instant>,
    mark: Vec<u8>,
}

impl SolverSession {
    /// Session on the default backend.
    pub fn new(formula: &CnfFormula) -> SolverSession {
        SolverSession::with_backend(formula, SolverKind::default())
    }

    pub fn with_backend(formula: &CnfFormula, kind: SolverKind) -> SolverSession {
        let backend: Box<dyn SatBackend> = match kind {
            SolverKind::Cdcl => Box::new(CdclSolver::new(formula)),
            SolverKind::Varisat => Box::new(VarisatSolver::new(formula)),
        };
        SolverSession::from_backend(formula.var_count(), backend)
    }

    pub fn from_backend(var_count: u32, backend: Box<dyn SatBackend>) -> SolverSession {
        SolverSession {
            backend: Some(backend),
            var_count,
            calls: 0,
            deadline: None,
            mark: vec![0; var_count as usize],
        }
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    /// Number of queries answered so far.
    pub fn sat_calls(&self) -> u64 {
        self.calls
    }

    /// Queries still running at `deadline` fail with [`SatError::Interrupted`].
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    /// Releases the backend; later queries fail with [`SatError::SessionDisposed`].
    pub fn dispose(&mut self) {
        self.backend = None;
    }

    /// Decides `F ∧ assumptions`. A returned model is total and extends the
    /// assumptions.
    pub fn check(&mut self, assumptions: &[Lit]) -> Result<SatOutcome, SatError> {
        if self.backend.is_none() {
            return Err(SatError::SessionDisposed);
        }
        self.validate(assumptions)?;
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(SatError::Interrupted);
        }
        let backend = self.backend.as_mut().expect("checked above");
        self.calls += 1;
        match backend.solve(assumptions, self.deadline)? {
            BackendAnswer::Unsat => Ok(SatOutcome::Unsatisfiable),
            BackendAnswer::Sat(lits) => {
                let model = Model::from_lits(self.var_count, lits);
                if let Some(bad) = assumptions.iter().find(|&&a| !model.lit_value(a)) {
                    return Err(SatError::Backend(format!("model violates assumption {bad}")));
                }
                Ok(SatOutcome::Satisfiable(model))
            }
        }
    }

    fn validate(&mut self, assumptions: &[Lit]) -> Result<(), SatError> {
        // mark: bit 0 = seen positive, bit 1 = seen negative
        let mut result = Ok(());
        for &lit in assumptions {
            if lit.var().index() > self.var_count {
                result = Err(SatError::AssumptionOutOfRange { lit, var_count: self.var_count });
                break;
            }
            let m = &mut self.mark[lit.var().slot()];
            *m |= if lit.is_positive() { 1 } else { 2 };
            if *m == 3 {
                result = Err(SatError::ContradictoryAssumptions(lit.var()));
                break;
            }
        }
        for &lit in assumptions {
            if let Some(m) = self.mark.get_mut(lit.var().slot()) {
                *m = 0;
            }
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_dimacs;
    use crate::test_support::{all_models, example};

    fn lits(values: &[i32]) -> Vec<Lit> {
        values.iter().map(|&v| Lit::from_dimacs(v).unwrap()).collect()
    }

    #[test]
    fn clause_free_formula_is_satisfiable() {
        for kind in SolverKind::ALL {
            let f = CnfFormula::new(3, Vec::<Vec<i32>>::new()).unwrap();
            let mut s = SolverSession::with_backend(&f, kind);
            let m = s.check(&[]).unwrap().model().unwrap();
            assert_eq!(m.var_count(), 3);
        }
    }

    #[test]
    fn contradictory_units_are_unsat() {
        for kind in SolverKind::ALL {
            let f = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
            let mut s = SolverSession::with_backend(&f, kind);
            assert_eq!(s.check(&[]).unwrap(), SatOutcome::Unsatisfiable);
        }
    }

    #[test]
    fn example_queries() {
        for kind in SolverKind::ALL {
            let f = example();
            let mut s = SolverSession::with_backend(&f, kind);
            assert!(s.check(&[]).unwrap().is_sat());
            let m = s.check(&lits(&[3])).unwrap().model().unwrap();
            assert_eq!(m.values(), &[true, true, true, false, true]);
            assert_eq!(s.check(&lits(&[3, -5])).unwrap(), SatOutcome::Unsatisfiable);
            // assumptions are not retained
            assert!(s.check(&lits(&[-3])).unwrap().is_sat());
            assert_eq!(s.sat_calls(), 4);
        }
    }

    #[test]
    fn rejects_bad_assumptions() {
        let f = example();
        let mut s = SolverSession::new(&f);
        assert_eq!(s.check(&lits(&[2, 3, -2])), Err(SatError::ContradictoryAssumptions(Var::new(2))));
        assert!(matches!(s.check(&lits(&[6])), Err(SatError::AssumptionOutOfRange { .. })));
        assert_eq!(s.sat_calls(), 0);
        // marks are cleared after a rejected query
        assert!(s.check(&lits(&[2, 3])).unwrap().is_sat());
        s.dispose();
        assert_eq!(s.check(&[]), Err(SatError::SessionDisposed));
    }

    #[test]
    fn models_are_sound_and_total() {
        let f = parse_dimacs("p cnf 6 3\n1 2 0\n-2 3 0\n-1 -3 0\n").unwrap();
        for kind in SolverKind::ALL {
            let mut s = SolverSession::with_backend(&f, kind);
            for a in [vec![], vec![1], vec![-1, 5], vec![2, -6]] {
                let assumptions = lits(&a);
                if let SatOutcome::Satisfiable(m) = s.check(&assumptions).unwrap() {
                    assert!(m.satisfies(&f));
                    assert!(assumptions.iter().all(|&l| m.lit_value(l)));
                }
            }
        }
    }

    #[test]
    fn agrees_with_enumeration_on_small_assumption_sets() {
        let f = parse_dimacs("p cnf 5 6\n1 2 -3 0\n-1 4 0\n-4 -2 0\n3 5 0\n-5 -1 0\n2 -4 5 0\n").unwrap();
        let models = all_models(&f);
        for kind in SolverKind::ALL {
            let mut s = SolverSession::with_backend(&f, kind);
            let all: Vec<i32> = (1..=5).flat_map(|v| [v, -v]).collect();
            let mut queries: Vec<Vec<i32>> = vec![vec![]];
            queries.extend(all.iter().map(|&a| vec![a]));
            for &a in &all {
                for &b in &all {
                    if a.abs() < b.abs() {
                        queries.push(vec![a, b]);
                    }
                }
            }
            for q in queries {
                let expected = models.iter().any(|m| q.iter().all(|&l| m[l.unsigned_abs() as usize - 1] == (l > 0)));
                assert_eq!(s.check(&lits(&q)).unwrap().is_sat(), expected, "{kind} {q:?}");
            }
        }
    }

    #[test]
    fn solver_kind_parses() {
        assert_eq!("cdcl".parse::<SolverKind>(), Ok(SolverKind::Cdcl));
        assert_eq!("varisat".parse::<SolverKind>(), Ok(SolverKind::Varisat));
        assert!("minisat".parse::<SolverKind>().is_err());
    }
}
