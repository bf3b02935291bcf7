//! CNF data model: variables, literals, normalized clauses and formulas.

mod dimacs;

pub use dimacs::{parse_dimacs, parse_dimacs_reader, write_dimacs, write_dimacs_to, DimacsError};

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroI32;

use thiserror::Error;

/// A propositional variable, 1-based as in DIMACS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Panics on index 0.
    pub fn new(index: u32) -> Var {
        assert!(index != 0, "variable index must be positive");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// 0-based position, for indexing dense per-variable tables.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_slot(slot: usize) -> Var {
        Var(slot as u32 + 1)
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A signed literal. `|value|` is the variable index, the sign its polarity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(NonZeroI32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        let v = var.0 as i32;
        Lit(NonZeroI32::new(if positive { v } else { -v }).unwrap())
    }

    /// Returns `None` for 0 and for `i32::MIN` (which has no positive counterpart).
    pub fn from_dimacs(value: i32) -> Option<Lit> {
        if value == i32::MIN {
            return None;
        }
        NonZeroI32::new(value).map(Lit)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0.get()
    }

    pub fn var(self) -> Var {
        Var(self.0.get().unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0.get() > 0
    }

    /// Key that orders by variable index first, negative before positive.
    fn sort_key(self) -> (u32, bool) {
        (self.var().0, self.is_positive())
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A normalized clause: non-empty, duplicate-free, non-tautological, sorted
/// ascending by variable index.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// `lits` must already be sorted, duplicate-free and non-tautological.
    pub(crate) fn from_normalized(lits: Vec<Lit>) -> Clause {
        debug_assert!(!lits.is_empty());
        debug_assert!(lits.windows(2).all(|w| w[0].var() < w[1].var()));
        Clause { lits }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.lits.len() == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = Lit> + '_ {
        self.lits.iter().copied()
    }

    pub fn to_dimacs(&self) -> Vec<i32> {
        self.lits.iter().map(|l| l.to_dimacs()).collect()
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.lits.iter()).finish()
    }
}

/// Result of normalizing a literal collection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Normalized {
    Clause(Clause),
    Tautology,
}

/// Deduplicates and sorts `lits`; a clause containing some variable in both
/// polarities is reported as [`Normalized::Tautology`].
pub fn normalize_clause(lits: impl IntoIterator<Item = Lit>) -> Result<Normalized, FormulaError> {
    let mut lits: Vec<Lit> = lits.into_iter().collect();
    if lits.is_empty() {
        return Err(FormulaError::EmptyClause);
    }
    lits.sort_unstable_by_key(|l| l.sort_key());
    lits.dedup();
    if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
        return Ok(Normalized::Tautology);
    }
    Ok(Normalized::Clause(Clause { lits }))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("empty clause: the input is trivially unsatisfiable")]
    EmptyClause,
    #[error("literal {lit} references variable beyond declared count {var_count}")]
    LiteralOutOfRange { lit: i32, var_count: u32 },
    #[error("invalid literal value {0}")]
    InvalidLiteral(i64),
}

/// A CNF formula over variables `1..=var_count`. Immutable once built.
///
/// `var_count` may exceed the number of variables that occur in clauses.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CnfFormula {
    var_count: u32,
    clauses: Vec<Clause>,
    names: BTreeMap<Var, String>,
}

impl CnfFormula {
    /// Builds a formula from raw DIMACS-style clauses, normalizing each one.
    /// Tautologies are dropped.
    pub fn new(var_count: u32, clauses: impl IntoIterator<Item = Vec<i32>>) -> Result<CnfFormula, FormulaError> {
        let mut out = Vec::new();
        for raw in clauses {
            let mut lits = Vec::with_capacity(raw.len());
            for value in raw {
                let lit = Lit::from_dimacs(value).ok_or(FormulaError::InvalidLiteral(value as i64))?;
                if lit.var().0 > var_count {
                    return Err(FormulaError::LiteralOutOfRange { lit: value, var_count });
                }
                lits.push(lit);
            }
            if let Normalized::Clause(c) = normalize_clause(lits)? {
                out.push(c);
            }
        }
        Ok(CnfFormula { var_count, clauses: out, names: BTreeMap::new() })
    }

    /// Builds a formula from already normalized clauses.
    pub fn from_clauses(var_count: u32, clauses: Vec<Clause>) -> Result<CnfFormula, FormulaError> {
        for c in &clauses {
            for l in c.iter() {
                if l.var().0 > var_count {
                    return Err(FormulaError::LiteralOutOfRange { lit: l.to_dimacs(), var_count });
                }
            }
        }
        Ok(CnfFormula { var_count, clauses, names: BTreeMap::new() })
    }

    /// Attaches display names. Entries for variables beyond `var_count` are dropped.
    pub fn with_names(mut self, names: BTreeMap<Var, String>) -> CnfFormula {
        let limit = self.var_count;
        self.names = names.into_iter().filter(|(v, _)| v.0 <= limit).collect();
        self
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn names(&self) -> &BTreeMap<Var, String> {
        &self.names
    }

    pub fn name(&self, var: Var) -> Option<&str> {
        self.names.get(&var).map(String::as_str)
    }

    /// Name if one is attached, otherwise the index.
    pub fn display_var(&self, var: Var) -> String {
        match self.name(var) {
            Some(n) => n.to_string(),
            None => var.to_string(),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.var_count).map(Var)
    }

    /// Whether a total assignment (indexed by slot) satisfies every clause.
    pub fn is_satisfied_by(&self, values: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| values[l.var().slot()] == l.is_positive()))
    }

    /// Clause multiset as sorted raw vectors, for order-insensitive comparison.
    pub fn clause_multiset(&self) -> Vec<Vec<i32>> {
        let mut all: Vec<Vec<i32>> = self.clauses.iter().map(Clause::to_dimacs).collect();
        all.sort();
        all
    }
}
