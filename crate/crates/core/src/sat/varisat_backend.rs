use std::time::Instant;

use varisat::ExtendFormula;

use super::{BackendAnswer, SatBackend, SatError};
use crate::formula::{CnfFormula, Lit};

/// Backend on the `varisat` crate. It has no interrupt hook, so deadlines
/// are only honoured between queries.
pub struct VarisatSolver {
    solver: varisat::Solver<'static>,
}

impl VarisatSolver {
    pub fn new(formula: &CnfFormula) -> VarisatSolver {
        let mut solver = varisat::Solver::new();
        let mut buffer = Vec::new();
        for clause in formula.clauses() {
            buffer.clear();
            buffer.extend(clause.iter().map(to_varisat));
            solver.add_clause(&buffer);
        }
        VarisatSolver { solver }
    }
}

fn to_varisat(lit: Lit) -> varisat::Lit {
    varisat::Lit::from_dimacs(lit.to_dimacs() as isize)
}

impl SatBackend for VarisatSolver {
    fn solve(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> Result<BackendAnswer, SatError> {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(SatError::Interrupted);
        }
        let assumptions: Vec<varisat::Lit> = assumptions.iter().copied().map(to_varisat).collect();
        self.solver.assume(&assumptions);
        let sat = self.solver.solve().map_err(|e| SatError::Backend(e.to_string()))?;
        if !sat {
            return Ok(BackendAnswer::Unsat);
        }
        let model = self.solver.model().ok_or_else(|| SatError::Backend("no model after SAT".into()))?;
        Ok(BackendAnswer::Sat(
            model
                .into_iter()
                .filter_map(|l| Lit::from_dimacs(l.to_dimacs() as i32))
                .collect(),
        ))
    }
}
