//! Core/dead variables and atomic sets via generate-and-test.
//!
//! For each undecided pivot `v` two certificates are requested, one with `v`
//! true and one with `v` false. Only variables that are true in the first and
//! false in the second can share an atomic set with `v`; each surviving
//! candidate `u` is then confirmed with `UNSAT(F ∧ v ∧ ¬u)` and
//! `UNSAT(F ∧ ¬v ∧ u)`.
//!
//! Three optional refinements are supported, all on by default:
//! the certificate queries double as core/dead detection, satisfiable tests
//! prune further candidates through their witnesses, and remainder sets of
//! earlier pivots confine later candidate sets.

mod candidates;

pub use candidates::{verify_pair, CandidateSet, ConfinementIndex, Direction, PairVerdict};

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::formula::{CnfFormula, Lit, Var};
use crate::sat::{Model, SatError, SatOutcome, SolverKind, SolverSession};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("the formula is unsatisfiable")]
    UnsatisfiableInput,
    #[error("time budget exceeded")]
    TimeBudgetExceeded,
    #[error("inconsistent certificates: {0}")]
    CertificateMismatch(String),
    #[error(transparent)]
    Sat(SatError),
}

impl From<SatError> for AnalysisError {
    fn from(e: SatError) -> Self {
        match e {
            SatError::Interrupted => AnalysisError::TimeBudgetExceeded,
            other => AnalysisError::Sat(other),
        }
    }
}

/// Core (always true) and dead (always false) variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BackboneResult {
    pub core: BTreeSet<Var>,
    pub dead: BTreeSet<Var>,
}

impl BackboneResult {
    pub fn is_empty(&self) -> bool {
        self.core.is_empty() && self.dead.is_empty()
    }

    pub fn len(&self) -> usize {
        self.core.len() + self.dead.len()
    }

    pub fn contains(&self, var: Var) -> bool {
        self.core.contains(&var) || self.dead.contains(&var)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomicSetKind {
    Core,
    Dead,
    Regular,
}

impl AtomicSetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AtomicSetKind::Core => "core",
            AtomicSetKind::Dead => "dead",
            AtomicSetKind::Regular => "regular",
        }
    }
}

impl fmt::Display for AtomicSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A set of at least two variables with equal values in every model.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomicSet {
    pub kind: AtomicSetKind,
    /// Sorted ascending.
    pub members: Vec<Var>,
}

impl AtomicSet {
    pub fn min_member(&self) -> Var {
        self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Counters describing the work done by one analysis run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub sat_calls: u64,
    /// Pivots that reached candidate construction.
    pub pivots: u64,
    /// Pair tests issued (each up to two SAT calls).
    pub candidate_tests: u64,
    pub pruned_by_refutation: u64,
    pub pruned_by_confinement: u64,
    /// Sum over pivots of the undecided candidates, the pivot included.
    pub candidate_volume: u64,
}

#[derive(Clone, Debug, Default)]
pub struct AtomicSetReport {
    /// Ordered by minimum member.
    pub sets: Vec<AtomicSet>,
    pub backbone: BackboneResult,
    pub stats: QueryStats,
}

impl AtomicSetReport {
    /// Assembles a report. Core and dead variables form an atomic set each
    /// when there are at least two of them; regular sets of fewer than two
    /// members are dropped.
    pub fn from_parts(backbone: BackboneResult, regular: Vec<Vec<Var>>, stats: QueryStats) -> AtomicSetReport {
        let mut sets: Vec<AtomicSet> = regular
            .into_iter()
            .filter(|m| m.len() >= 2)
            .map(|mut members| {
                members.sort_unstable();
                AtomicSet { kind: AtomicSetKind::Regular, members }
            })
            .collect();
        for (kind, vars) in [(AtomicSetKind::Core, &backbone.core), (AtomicSetKind::Dead, &backbone.dead)] {
            if vars.len() >= 2 {
                sets.push(AtomicSet { kind, members: vars.iter().copied().collect() });
            }
        }
        sets.sort_by_key(|s| s.min_member());
        AtomicSetReport { sets, backbone, stats }
    }

    pub fn regular_sets(&self) -> impl Iterator<Item = &AtomicSet> {
        self.sets.iter().filter(|s| s.kind == AtomicSetKind::Regular)
    }

    /// Total number of variables in reported sets.
    pub fn set_variables(&self) -> usize {
        self.sets.iter().map(AtomicSet::len).sum()
    }

    /// Equality of the reported sets and backbone, ignoring statistics.
    pub fn same_result(&self, other: &AtomicSetReport) -> bool {
        self.sets == other.sets && self.backbone == other.backbone
    }
}

/// Configuration for [`gnt_atomic_sets`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GntOptions {
    /// Detect core/dead variables with the pivot certificate queries instead
    /// of a separate backbone pass up front.
    pub inline_backbone: bool,
    /// Use witnesses of failed pair tests to drop further candidates.
    pub refutation_pruning: bool,
    /// Intersect candidates with recorded remainder sets.
    pub confinement: bool,
    pub time_budget: Option<Duration>,
    pub solver: SolverKind,
}

impl Default for GntOptions {
    fn default() -> Self {
        GntOptions {
            inline_backbone: true,
            refutation_pruning: true,
            confinement: true,
            time_budget: None,
            solver: SolverKind::default(),
        }
    }
}

impl GntOptions {
    /// The plain procedure: backbone computed first, no pruning, no confinement.
    pub fn unaugmented() -> GntOptions {
        GntOptions { inline_backbone: false, refutation_pruning: false, confinement: false, ..GntOptions::default() }
    }
}

/// Tracks whether some query has already shown `F` satisfiable, so that an
/// unsatisfiable pivot query can be attributed to the pivot rather than to `F`.
struct Prober<'a> {
    session: &'a mut SolverSession,
    known_sat: bool,
}

impl Prober<'_> {
    fn check(&mut self, assumptions: &[Lit]) -> Result<Option<Model>, AnalysisError> {
        match self.session.check(assumptions)? {
            SatOutcome::Satisfiable(m) => {
                self.known_sat = true;
                Ok(Some(m))
            }
            SatOutcome::Unsatisfiable => Ok(None),
        }
    }

    /// Called after `F ∧ lit` came back unsatisfiable: either `F ∧ ¬lit`
    /// has a model or `F` itself is unsatisfiable.
    fn complement_model(&mut self, lit: Lit) -> Result<Option<Model>, AnalysisError> {
        if self.known_sat {
            return Ok(None);
        }
        match self.check(&[!lit])? {
            Some(m) => Ok(Some(m)),
            None => Err(AnalysisError::UnsatisfiableInput),
        }
    }
}

/// Exact core and dead sets, with one or two queries per variable.
///
/// Queries whose answer some earlier model already settles are skipped.
pub fn compute_backbone(session: &mut SolverSession) -> Result<BackboneResult, AnalysisError> {
    let n = session.var_count() as usize;
    let mut prober = Prober { session, known_sat: false };
    let mut seen_true = vec![false; n];
    let mut seen_false = vec![false; n];
    let record = |m: &Model, seen_true: &mut [bool], seen_false: &mut [bool]| {
        for (i, &b) in m.values().iter().enumerate() {
            if b {
                seen_true[i] = true;
            } else {
                seen_false[i] = true;
            }
        }
    };
    let mut result = BackboneResult::default();
    for slot in 0..n {
        let v = Var::from_slot(slot);
        if !seen_true[slot] {
            match prober.check(&[v.positive()])? {
                Some(m) => record(&m, &mut seen_true, &mut seen_false),
                None => {
                    if let Some(m) = prober.complement_model(v.positive())? {
                        record(&m, &mut seen_true, &mut seen_false);
                    }
                    result.dead.insert(v);
                    continue;
                }
            }
        }
        if !seen_false[slot] {
            match prober.check(&[v.negative()])? {
                Some(m) => record(&m, &mut seen_true, &mut seen_false),
                None => {
                    result.core.insert(v);
                }
            }
        }
    }
    Ok(result)
}

/// Core and dead sets straight from the definitions: `F ∧ v` and `F ∧ ¬v`
/// for every variable. This is the external input of the plain procedure.
pub fn definitional_backbone(session: &mut SolverSession) -> Result<BackboneResult, AnalysisError> {
    let mut result = BackboneResult::default();
    for v in (1..=session.var_count()).map(Var::new) {
        let pos = session.check(&[v.positive()])?.is_sat();
        let neg = session.check(&[v.negative()])?.is_sat();
        match (pos, neg) {
            (false, false) => return Err(AnalysisError::UnsatisfiableInput),
            (false, true) => {
                result.dead.insert(v);
            }
            (true, false) => {
                result.core.insert(v);
            }
            (true, true) => {}
        }
    }
    Ok(result)
}

/// Atomic sets of `formula` on a fresh session of the configured backend.
pub fn gnt_atomic_sets(formula: &CnfFormula, options: &GntOptions) -> Result<AtomicSetReport, AnalysisError> {
    let mut session = SolverSession::with_backend(formula, options.solver);
    gnt_with_session(&mut session, options)
}

/// Atomic sets of the formula loaded in `session`. `options.solver` is ignored.
///
/// Either a complete report or an error is returned; a run that exceeds the
/// time budget yields no partial result.
pub fn gnt_with_session(session: &mut SolverSession, options: &GntOptions) -> Result<AtomicSetReport, AnalysisError> {
    let deadline = options.time_budget.map(|b| Instant::now() + b);
    session.set_deadline(deadline);
    let calls_before = session.sat_calls();
    let result = run_gnt(session, options);
    let calls = session.sat_calls() - calls_before;
    session.set_deadline(None);
    let mut report = result?;
    report.stats.sat_calls = calls;
    Ok(report)
}

fn run_gnt(session: &mut SolverSession, options: &GntOptions) -> Result<AtomicSetReport, AnalysisError> {
    let n = session.var_count();
    let mut stats = QueryStats::default();
    let mut decided = vec![false; n as usize];
    let mut backbone = if options.inline_backbone {
        BackboneResult::default()
    } else {
        let bb = definitional_backbone(session)?;
        for v in bb.core.iter().chain(&bb.dead) {
            decided[v.slot()] = true;
        }
        bb
    };
    // A non-empty external backbone pass has already issued a satisfiable query.
    let mut prober = Prober { session, known_sat: !options.inline_backbone && n > 0 };
    let mut confinement = ConfinementIndex::new(n);
    let mut regular: Vec<Vec<Var>> = Vec::new();

    for pivot in (1..=n).map(Var::new) {
        if decided[pivot.slot()] {
            continue;
        }
        let pos = match prober.check(&[pivot.positive()])? {
            Some(m) => m,
            None => {
                prober.complement_model(pivot.positive())?;
                backbone.dead.insert(pivot);
                decided[pivot.slot()] = true;
                continue;
            }
        };
        let neg = match prober.check(&[pivot.negative()])? {
            Some(m) => m,
            None => {
                backbone.core.insert(pivot);
                decided[pivot.slot()] = true;
                continue;
            }
        };

        stats.pivots += 1;
        let mut candidates = CandidateSet::from_certificates(pivot, &pos, &neg)?;
        if options.confinement {
            stats.pruned_by_confinement += confinement.apply(&mut candidates) as u64;
        }
        // The remainder must be taken from the candidate set before pruning:
        // a pruned variable may still be equivalent to a surviving one.
        let generated: Vec<Var> = candidates.members().to_vec();
        let to_test: Vec<Var> = generated.iter().copied().filter(|&u| u != pivot && !decided[u.slot()]).collect();
        stats.candidate_volume += to_test.len() as u64 + 1;

        let mut members = vec![pivot];
        for u in to_test {
            if !candidates.contains(u) {
                continue;
            }
            stats.candidate_tests += 1;
            match verify_pair(prober.session, pivot, u)? {
                PairVerdict::Confirmed => members.push(u),
                PairVerdict::Refuted { witness, direction } => {
                    candidates.remove(u);
                    if options.refutation_pruning {
                        stats.pruned_by_refutation += candidates.prune_with_refutation(&witness, direction) as u64;
                    }
                }
            }
        }

        for m in &members {
            decided[m.slot()] = true;
        }
        if options.confinement {
            let remainder = generated.into_iter().filter(|u| members.binary_search(u).is_err()).collect();
            confinement.record(remainder);
        }
        if members.len() > 1 {
            regular.push(members);
        }
    }

    Ok(AtomicSetReport::from_parts(backbone, regular, stats))
}
