//! Hybrid satisfiability engine.
//!
//! DPLL search over the CNF part with two-watched-literal unit propagation,
//! interleaved with Gauss-Jordan elimination on the XOR part: whenever CNF
//! propagation reaches a fixpoint, the XOR system is re-reduced under the
//! current partial assignment; forced variables feed back into the CNF as
//! units and an infeasible residual system triggers backtracking. Formulas
//! without CNF clauses are decided by pure elimination, with no decisions.
//!
//! Branching is lowest-index-first, true phase first, so runs are fully
//! deterministic under conflict-limited budgets.

use crate::formula::{Assignment, Formula};
use crate::gf2::{BitVec, Gf2System};
use std::time::{Duration, Instant};

/// Search limits. An empty budget means run to completion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveBudget {
    pub max_conflicts: Option<u64>,
    pub wall_timeout: Option<Duration>,
}

impl SolveBudget {
    pub fn unlimited() -> Self {
        SolveBudget::default()
    }

    pub fn with_conflicts(max_conflicts: u64) -> Self {
        SolveBudget {
            max_conflicts: Some(max_conflicts),
            wall_timeout: None,
        }
    }

    pub fn with_timeout(wall_timeout: Duration) -> Self {
        SolveBudget {
            max_conflicts: None,
            wall_timeout: Some(wall_timeout),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(Assignment),
    Unsat,
    /// A budget limit was hit; no claim about satisfiability.
    Exhausted,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub verdict: Verdict,
    pub stats: SolveStats,
}

/// Convenience wrapper around `Formula::evaluate` for model auditing.
pub fn check_model(formula: &Formula, assignment: &Assignment) -> bool {
    formula.evaluate(assignment).unwrap_or(false)
}

pub fn solve(formula: &Formula, budget: SolveBudget) -> SolveOutcome {
    let start = Instant::now();
    let mut stats = SolveStats::default();

    // An empty CNF clause can only come from hand-built input; it falsifies
    // the formula outright.
    if formula.cnf.iter().any(|c| c.literals.is_empty()) {
        stats.elapsed = start.elapsed();
        return SolveOutcome {
            verdict: Verdict::Unsat,
            stats,
        };
    }

    if formula.cnf.is_empty() {
        // Pure XOR (or empty) formula: eliminate, no search.
        let reduced = formula.xor_system().row_reduce();
        let verdict = match reduced.particular_solution() {
            Err(_) => Verdict::Unsat,
            Ok(bits) => {
                let model = Assignment::from_bitvec(bits);
                assert!(
                    check_model(formula, &model),
                    "elimination produced a bad model"
                );
                Verdict::Sat(model)
            }
        };
        stats.elapsed = start.elapsed();
        return SolveOutcome { verdict, stats };
    }

    let mut engine = Engine::new(formula, budget, start);
    let verdict = engine.run();
    let mut stats = engine.stats;
    stats.elapsed = start.elapsed();
    if let Verdict::Sat(model) = &verdict {
        assert!(check_model(formula, model), "search produced a bad model");
    }
    SolveOutcome { verdict, stats }
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

type Lit = u32; // var * 2 + (1 if negated)

#[inline]
fn lit(var: usize, negated: bool) -> Lit {
    (var as u32) << 1 | negated as u32
}

#[inline]
fn lit_var(l: Lit) -> usize {
    (l >> 1) as usize
}

#[inline]
fn lit_negated(l: Lit) -> bool {
    l & 1 == 1
}

#[inline]
fn value_in(assign: &[i8], l: Lit) -> i8 {
    let v = assign[lit_var(l)];
    if lit_negated(l) {
        -v
    } else {
        v
    }
}

struct Frame {
    trail_len: usize,
    var: usize,
    flipped: bool,
}

struct XorState {
    base: Gf2System,
    /// Variables that occur in at least one XOR row.
    involved: Vec<bool>,
    /// Re-reduction is skipped until an involved variable changes.
    dirty: bool,
}

struct Engine {
    n: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    assign: Vec<i8>,
    fixed: BitVec,
    values: BitVec,
    trail: Vec<Lit>,
    qhead: usize,
    frames: Vec<Frame>,
    xor: Option<XorState>,
    root_conflict: bool,
    budget: SolveBudget,
    start: Instant,
    stats: SolveStats,
    ticks: u64,
}

enum Propagation {
    Fixpoint,
    Conflict,
}

impl Engine {
    fn new(formula: &Formula, budget: SolveBudget, start: Instant) -> Self {
        let n = formula.n;
        let mut clauses = Vec::with_capacity(formula.cnf.len());
        let mut watches = vec![Vec::new(); 2 * n];
        let mut units = Vec::new();
        for kc in &formula.cnf {
            let lits: Vec<Lit> = kc
                .literals
                .iter()
                .map(|l| lit(l.var as usize - 1, l.negated))
                .collect();
            if lits.len() == 1 {
                units.push(lits[0]);
                continue;
            }
            let idx = clauses.len() as u32;
            watches[lits[0] as usize].push(idx);
            watches[lits[1] as usize].push(idx);
            clauses.push(lits);
        }
        let xor = if formula.xors.is_empty() {
            None
        } else {
            let base = formula.xor_system();
            let mut involved = vec![false; n];
            for row in base.rows() {
                for c in row.bits.iter_ones() {
                    involved[c] = true;
                }
            }
            Some(XorState {
                base,
                involved,
                dirty: true,
            })
        };
        let mut engine = Engine {
            n,
            clauses,
            watches,
            assign: vec![UNDEF; n],
            fixed: BitVec::zeros(n),
            values: BitVec::zeros(n),
            trail: Vec::with_capacity(n),
            qhead: 0,
            frames: Vec::new(),
            xor,
            root_conflict: false,
            budget,
            start,
            stats: SolveStats::default(),
            ticks: 0,
        };
        for u in units {
            if !engine.enqueue(u) {
                engine.root_conflict = true;
                break;
            }
        }
        engine
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        value_in(&self.assign, l)
    }

    /// Records an assignment; false on contradiction with the current value.
    fn enqueue(&mut self, l: Lit) -> bool {
        match self.value(l) {
            TRUE => true,
            FALSE => false,
            _ => {
                let var = lit_var(l);
                let value = !lit_negated(l);
                self.assign[var] = if value { TRUE } else { FALSE };
                self.fixed.set(var, true);
                self.values.set(var, value);
                self.trail.push(l);
                if let Some(x) = &mut self.xor {
                    if x.involved[var] {
                        x.dirty = true;
                    }
                }
                true
            }
        }
    }

    fn undo_to(&mut self, trail_len: usize) {
        while self.trail.len() > trail_len {
            let l = self.trail.pop().unwrap();
            let var = lit_var(l);
            self.assign[var] = UNDEF;
            self.fixed.set(var, false);
            self.values.set(var, false);
        }
        self.qhead = trail_len;
        if let Some(x) = &mut self.xor {
            x.dirty = true;
        }
    }

    fn propagate(&mut self) -> Propagation {
        loop {
            while self.qhead < self.trail.len() {
                let p = self.trail[self.qhead];
                self.qhead += 1;
                self.stats.propagations += 1;
                if let Propagation::Conflict = self.propagate_cnf(p ^ 1) {
                    return Propagation::Conflict;
                }
            }
            let forced = match self.propagate_xor() {
                Ok(count) => count,
                Err(()) => return Propagation::Conflict,
            };
            if forced == 0 {
                return Propagation::Fixpoint;
            }
        }
    }

    /// Visits the watch list of a literal that just became false.
    fn propagate_cnf(&mut self, false_lit: Lit) -> Propagation {
        let mut watchers = std::mem::take(&mut self.watches[false_lit as usize]);
        let mut keep = 0;
        let mut conflict = false;
        'watchers: for wi in 0..watchers.len() {
            let ci = watchers[wi];
            let clause = &mut self.clauses[ci as usize];
            if clause[0] == false_lit {
                clause.swap(0, 1);
            }
            debug_assert_eq!(clause[1], false_lit);
            let first = clause[0];
            if value_in(&self.assign, first) == TRUE {
                watchers[keep] = ci;
                keep += 1;
                continue;
            }
            for j in 2..clause.len() {
                let cand = clause[j];
                if value_in(&self.assign, cand) != FALSE {
                    clause.swap(1, j);
                    self.watches[cand as usize].push(ci);
                    continue 'watchers;
                }
            }
            // no replacement: clause is unit or falsified
            watchers[keep] = ci;
            keep += 1;
            if !self.enqueue(first) {
                // keep the remaining watchers before bailing out
                let tail = watchers.len() - (wi + 1);
                watchers.copy_within(wi + 1.., keep);
                keep += tail;
                conflict = true;
                break;
            }
        }
        watchers.truncate(keep);
        debug_assert!(self.watches[false_lit as usize].is_empty());
        self.watches[false_lit as usize] = watchers;
        if conflict {
            Propagation::Conflict
        } else {
            Propagation::Fixpoint
        }
    }

    /// Reduces the XOR system under the current assignment. Returns the
    /// number of newly forced literals, or Err on an infeasible residual.
    fn propagate_xor(&mut self) -> Result<usize, ()> {
        let Some(x) = &mut self.xor else {
            return Ok(0);
        };
        if !x.dirty {
            return Ok(0);
        }
        x.dirty = false;
        let residual = x.base.substitute(&self.fixed, &self.values);
        let reduced = residual.row_reduce();
        if !reduced.is_consistent() {
            return Err(());
        }
        let forced: Vec<(usize, bool)> = reduced.unit_rows().collect();
        let mut count = 0;
        for (var, value) in forced {
            debug_assert_eq!(self.assign[var], UNDEF);
            if !self.enqueue(lit(var, !value)) {
                return Err(());
            }
            count += 1;
        }
        Ok(count)
    }

    fn decide(&mut self) -> bool {
        let Some(var) = (0..self.n).find(|&v| self.assign[v] == UNDEF) else {
            return false;
        };
        self.stats.decisions += 1;
        self.frames.push(Frame {
            trail_len: self.trail.len(),
            var,
            flipped: false,
        });
        let ok = self.enqueue(lit(var, false)); // branch true first
        debug_assert!(ok);
        true
    }

    /// Chronological backtracking; false when the root is refuted.
    fn resolve_conflict(&mut self) -> bool {
        loop {
            let Some(frame) = self.frames.pop() else {
                return false;
            };
            self.undo_to(frame.trail_len);
            if !frame.flipped {
                self.frames.push(Frame {
                    trail_len: frame.trail_len,
                    var: frame.var,
                    flipped: true,
                });
                let ok = self.enqueue(lit(frame.var, true));
                debug_assert!(ok);
                return true;
            }
        }
    }

    fn out_of_budget(&mut self) -> bool {
        if let Some(max) = self.budget.max_conflicts {
            if self.stats.conflicts >= max {
                return true;
            }
        }
        if let Some(timeout) = self.budget.wall_timeout {
            self.ticks += 1;
            if self.ticks % 512 == 0 && self.start.elapsed() >= timeout {
                return true;
            }
        }
        false
    }

    fn run(&mut self) -> Verdict {
        if self.root_conflict {
            return Verdict::Unsat;
        }
        loop {
            match self.propagate() {
                Propagation::Conflict => {
                    self.stats.conflicts += 1;
                    if self.out_of_budget() {
                        return Verdict::Exhausted;
                    }
                    if !self.resolve_conflict() {
                        return Verdict::Unsat;
                    }
                }
                Propagation::Fixpoint => {
                    if self.trail.len() == self.n {
                        let mut model = Assignment::all_false(self.n);
                        for v in 0..self.n {
                            model.set(v as u32 + 1, self.assign[v] == TRUE);
                        }
                        return Verdict::Sat(model);
                    }
                    if self.budget.wall_timeout.is_some() && self.out_of_budget() {
                        return Verdict::Exhausted;
                    }
                    let decided = self.decide();
                    debug_assert!(decided);
                }
            }
        }
    }
}
