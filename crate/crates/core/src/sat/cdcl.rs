//! A deterministic CDCL solver with two watched literals, first-UIP
//! learning, VSIDS, phase saving and Luby restarts.
//!
//! Assumptions are handled as the first decisions of every search, so
//! learned clauses only depend on the formula and stay valid across queries.

use std::time::Instant;

use super::{BackendAnswer, SatBackend, SatError};
use crate::formula::{CnfFormula, Lit, Var};

/// Internal literal encoding: `2 * var + negated`, with 0-based variables.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct ILit(u32);

impl ILit {
    fn new(var: usize, negated: bool) -> ILit {
        ILit((var as u32) << 1 | negated as u32)
    }

    fn from_lit(lit: Lit) -> ILit {
        ILit::new(lit.var().slot(), !lit.is_positive())
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn negated(self) -> bool {
        self.0 & 1 == 1
    }

    fn code(self) -> usize {
        self.0 as usize
    }

    fn not(self) -> ILit {
        ILit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Value {
    True,
    False,
    Unassigned,
}

type ClauseRef = u32;

struct StoredClause {
    lits: Vec<ILit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watcher {
    clause: ClauseRef,
    blocker: ILit,
}

/// Max-heap of variables keyed on activity.
struct VarOrder {
    heap: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl VarOrder {
    fn new(n: usize) -> VarOrder {
        VarOrder { heap: (0..n).collect(), position: (0..n).map(Some).collect() }
    }

    fn contains(&self, v: usize) -> bool {
        self.position[v].is_some()
    }

    fn insert(&mut self, v: usize, activity: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.position[v] = Some(self.heap.len());
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, activity);
    }

    fn bumped(&mut self, v: usize, activity: &[f64]) {
        if let Some(i) = self.position[v] {
            self.sift_up(i, activity);
        }
    }

    fn pop(&mut self, activity: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.position[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.position[last] = Some(0);
            self.sift_down(0, activity);
        }
        Some(top)
    }

    fn higher(a: usize, b: usize, activity: &[f64]) -> bool {
        activity[a] > activity[b] || (activity[a] == activity[b] && a < b)
    }

    fn sift_up(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::higher(v, p, activity) {
                break;
            }
            self.heap[i] = p;
            self.position[p] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.position[v] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && Self::higher(self.heap[right], self.heap[left], activity) {
                right
            } else {
                left
            };
            if !Self::higher(self.heap[child], v, activity) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.position[self.heap[i]] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.position[v] = Some(i);
    }
}

enum SearchResult {
    Sat,
    Unsat,
    Restart,
}

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_UNIT: u64 = 100;
const DEADLINE_CHECK_INTERVAL: u64 = 128;

pub struct CdclSolver {
    num_vars: usize,
    clauses: Vec<StoredClause>,
    learnts: Vec<ClauseRef>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    level_stamp: Vec<u64>,
    stamp: u64,
    ok: bool,
    max_learnts: f64,
    conflicts: u64,
}

impl CdclSolver {
    pub fn new(formula: &CnfFormula) -> CdclSolver {
        let n = formula.var_count() as usize;
        let mut solver = CdclSolver {
            num_vars: n,
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![Value::Unassigned; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            clause_inc: 1.0,
            order: VarOrder::new(n),
            phase: vec![false; n],
            seen: vec![false; n],
            level_stamp: vec![0; n + 1],
            stamp: 0,
            ok: true,
            max_learnts: (formula.clause_count() as f64 / 3.0).max(2000.0),
            conflicts: 0,
        };
        for clause in formula.clauses() {
            let lits: Vec<ILit> = clause.iter().map(ILit::from_lit).collect();
            solver.add_input_clause(lits);
        }
        solver
    }

    fn add_input_clause(&mut self, lits: Vec<ILit>) {
        if !self.ok {
            return;
        }
        match lits.len() {
            0 => self.ok = false,
            1 => match self.value(lits[0]) {
                Value::True => {}
                Value::False => self.ok = false,
                Value::Unassigned => self.enqueue(lits[0], None),
            },
            _ => {
                self.attach(lits, false, 0);
            }
        }
    }

    fn attach(&mut self, lits: Vec<ILit>, learnt: bool, lbd: u32) -> ClauseRef {
        let cref = self.clauses.len() as ClauseRef;
        self.watches[lits[0].not().code()].push(Watcher { clause: cref, blocker: lits[1] });
        self.watches[lits[1].not().code()].push(Watcher { clause: cref, blocker: lits[0] });
        self.clauses.push(StoredClause { lits, learnt, deleted: false, lbd, activity: 0.0 });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn value(&self, lit: ILit) -> Value {
        lit_value(&self.assigns, lit)
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, lit: ILit, reason: Option<ClauseRef>) {
        let v = lit.var();
        self.assigns[v] = if lit.negated() { Value::False } else { Value::True };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn backtrack(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let stop = self.trail_lim[target as usize];
        for i in (stop..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var();
            self.phase[v] = !lit.negated();
            self.assigns[v] = Value::Unassigned;
            self.reason[v] = None;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(stop);
        self.trail_lim.truncate(target as usize);
        self.qhead = self.qhead.min(stop);
    }

    /// Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p.not();
            let mut watchers = std::mem::take(&mut self.watches[p.code()]);
            let mut keep = 0;
            let mut conflict = None;
            let mut i = 0;
            while i < watchers.len() {
                let w = watchers[i];
                i += 1;
                if self.clauses[w.clause as usize].deleted {
                    continue;
                }
                if self.value(w.blocker) == Value::True {
                    watchers[keep] = w;
                    keep += 1;
                    continue;
                }
                let cref = w.clause;
                let assigns = &self.assigns;
                let clause = &mut self.clauses[cref as usize].lits;
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if first != w.blocker && lit_value(assigns, first) == Value::True {
                    watchers[keep] = Watcher { clause: cref, blocker: first };
                    keep += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    if lit_value(assigns, clause[k]) != Value::False {
                        clause.swap(1, k);
                        self.watches[clause[1].not().code()].push(Watcher { clause: cref, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                watchers[keep] = Watcher { clause: cref, blocker: first };
                keep += 1;
                if self.value(first) == Value::False {
                    conflict = Some(cref);
                    while i < watchers.len() {
                        watchers[keep] = watchers[i];
                        keep += 1;
                        i += 1;
                    }
                    self.qhead = self.trail.len();
                } else {
                    self.enqueue(first, Some(cref));
                }
            }
            watchers.truncate(keep);
            // Watchers pushed onto this list while it was taken belong to other literals,
            // so the list we restore is complete.
            debug_assert!(self.watches[p.code()].is_empty());
            self.watches[p.code()] = watchers;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: ClauseRef) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.clause_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, a literal of the backjump level second) and the level.
    fn analyze(&mut self, conflict: ClauseRef) -> (Vec<ILit>, u32) {
        let current = self.decision_level();
        let mut learnt = vec![ILit(0)];
        let mut pending = 0usize;
        let mut index = self.trail.len();
        let mut cref = conflict;
        let mut asserting: Option<ILit> = None;

        loop {
            self.bump_clause(cref);
            let start = if asserting.is_some() { 1 } else { 0 };
            let len = self.clauses[cref as usize].lits.len();
            for k in start..len {
                let q = self.clauses[cref as usize].lits[k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let p = self.trail[index];
            self.seen[p.var()] = false;
            pending -= 1;
            asserting = Some(p);
            if pending == 0 {
                break;
            }
            cref = self.reason[p.var()].expect("implied literal has a reason");
        }
        learnt[0] = asserting.expect("conflict at positive level").not();

        // Local minimization: drop literals whose reason is covered by the clause.
        let marked: Vec<usize> = learnt[1..].iter().map(|l| l.var()).collect();
        let mut kept = 1;
        for k in 1..learnt.len() {
            let lit = learnt[k];
            let redundant = match self.reason[lit.var()] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..]
                    .iter()
                    .all(|q| self.seen[q.var()] || self.level[q.var()] == 0),
            };
            if !redundant {
                learnt[kept] = lit;
                kept += 1;
            }
        }
        for v in marked {
            self.seen[v] = false;
        }
        learnt.truncate(kept);

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var()] > self.level[learnt[best].var()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            self.level[learnt[1].var()]
        };
        (learnt, backjump)
    }

    fn literal_block_distance(&mut self, lits: &[ILit]) -> u32 {
        self.stamp += 1;
        let mut count = 0;
        for l in lits {
            let lvl = self.level[l.var()] as usize;
            if lvl >= self.level_stamp.len() {
                self.level_stamp.resize(lvl + 1, 0);
            }
            if self.level_stamp[lvl] != self.stamp {
                self.level_stamp[lvl] = self.stamp;
                count += 1;
            }
        }
        count
    }

    fn pick_branch(&mut self) -> Option<ILit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v] == Value::Unassigned {
                return Some(ILit::new(v, !self.phase[v]));
            }
        }
        None
    }

    fn is_locked(&self, cref: ClauseRef) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        self.reason[first.var()] == Some(cref) && self.value(first) == Value::True
    }

    /// Drops the less useful half of the learnt clauses. Binary and low-LBD
    /// clauses are kept.
    fn reduce_db(&mut self) {
        let mut order = std::mem::take(&mut self.learnts);
        order.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            cb.lbd.cmp(&ca.lbd).then(ca.activity.partial_cmp(&cb.activity).unwrap()).then(a.cmp(&b))
        });
        let limit = order.len() / 2;
        let mut kept = Vec::with_capacity(order.len());
        for (i, cref) in order.into_iter().enumerate() {
            let c = &self.clauses[cref as usize];
            if i < limit && c.lits.len() > 2 && c.lbd > 2 && !self.is_locked(cref) {
                let c = &mut self.clauses[cref as usize];
                c.deleted = true;
                c.lits = Vec::new();
            } else {
                kept.push(cref);
            }
        }
        kept.sort_unstable();
        self.learnts = kept;
        for list in self.watches.iter_mut() {
            list.retain(|w| !self.clauses[w.clause as usize].deleted);
        }
    }

    fn search(
        &mut self,
        assumptions: &[ILit],
        conflict_budget: u64,
        deadline: Option<Instant>,
    ) -> Result<SearchResult, SatError> {
        let mut local_conflicts = 0u64;
        loop {
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                local_conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Ok(SearchResult::Unsat);
                }
                let (learnt, backjump) = self.analyze(conflict);
                self.backtrack(backjump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let lbd = self.literal_block_distance(&learnt);
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true, lbd);
                    self.bump_clause(cref);
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.clause_inc /= CLAUSE_DECAY;
                if self.conflicts.is_multiple_of(DEADLINE_CHECK_INTERVAL) {
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            return Err(SatError::Interrupted);
                        }
                    }
                }
                continue;
            }

            if local_conflicts >= conflict_budget {
                return Ok(SearchResult::Restart);
            }

            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                match self.value(a) {
                    Value::True => self.new_decision_level(),
                    Value::False => return Ok(SearchResult::Unsat),
                    Value::Unassigned => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let decision = match next {
                Some(a) => a,
                None => match self.pick_branch() {
                    Some(l) => l,
                    None => return Ok(SearchResult::Sat),
                },
            };
            self.new_decision_level();
            self.enqueue(decision, None);
        }
    }

    fn solve_internal(&mut self, assumptions: &[ILit], deadline: Option<Instant>) -> Result<Option<Vec<Lit>>, SatError> {
        if !self.ok {
            return Ok(None);
        }
        self.backtrack(0);
        let mut restarts = 0u32;
        let result = loop {
            let budget = luby(restarts) * RESTART_UNIT;
            restarts += 1;
            match self.search(assumptions, budget, deadline) {
                Err(e) => {
                    self.backtrack(0);
                    return Err(e);
                }
                Ok(SearchResult::Sat) => {
                    let model = (0..self.num_vars)
                        .map(|v| Lit::new(Var::from_slot(v), self.assigns[v] == Value::True))
                        .collect();
                    break Some(model);
                }
                Ok(SearchResult::Unsat) => break None,
                Ok(SearchResult::Restart) => {
                    self.backtrack(0);
                    if self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64 {
                        self.reduce_db();
                        self.max_learnts *= 1.1;
                    }
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            return Err(SatError::Interrupted);
                        }
                    }
                }
            }
        };
        self.backtrack(0);
        Ok(result)
    }
}

impl SatBackend for CdclSolver {
    fn solve(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> Result<BackendAnswer, SatError> {
        let internal: Vec<ILit> = assumptions.iter().map(|&l| ILit::from_lit(l)).collect();
        Ok(match self.solve_internal(&internal, deadline)? {
            Some(model) => BackendAnswer::Sat(model),
            None => BackendAnswer::Unsat,
        })
    }
}

/// The Luby sequence 1, 1, 2, 1, 1, 2, 4, ...
fn lit_value(assigns: &[Value], lit: ILit) -> Value {
    match assigns[lit.var()] {
        Value::Unassigned => Value::Unassigned,
        Value::True if !lit.negated() => Value::True,
        Value::False if lit.negated() => Value::True,
        _ => Value::False,
    }
}

fn luby(i: u32) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i as u64 + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut i = i as u64;
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}
