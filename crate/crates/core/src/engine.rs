//! Local-evaluation tabled resolution and the multi-threaded driver.
//!
//! Every worker runs the same query against the shared [`TableSpace`] and is
//! the generator for all of its own subgoal calls. Clause resolution is
//! top-down, left to right. A tabled call is resolved as follows:
//!
//! * complete frame: consume its answers;
//! * frame already on this thread's dependency stack: merge every stack
//!   entry above it into its SCC and consume the answers stored so far;
//! * new frame: push it, run all its clauses once, and if it turned out to be
//!   the leader of its SCC, re-derive every member until a full round adds no
//!   answer new for this thread, then complete the whole SCC.
//!
//! Answers only leave an SCC after it completes. `new_answer` never cuts a
//! derivation short; its result only feeds the round fixpoint test.

use std::collections::{BTreeSet, HashMap};
use std::sync::Barrier;
use std::time::{Duration, Instant};

use crate::program::{Clause, Literal, Pred, Program, ProgramError};
use crate::tablespace::{Design, MemoryCounters, SubgoalFrame, TableError, TableSpace, MAX_THREADS};
use crate::term::{Term, VarId};
use crate::trie::SyncMode;

/// Ground argument tuples of the query instances that are true.
pub type AnswerSet = BTreeSet<Vec<Term>>;

const WORKER_STACK: usize = 64 << 20;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("thread count {0} outside 1..={MAX_THREADS}")]
    Threads(usize),
    #[error("SCC led by {subgoal} did not reach a fixpoint within {limit} rounds")]
    Watchdog { subgoal: String, limit: u64 },
    #[error("worker thread {0} panicked")]
    WorkerPanic(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub design: Design,
    /// Synchronization of shared tries; ignored by NS.
    pub sync: SyncMode,
    pub threads: usize,
}

impl EvalConfig {
    pub fn new(design: Design, sync: SyncMode, threads: usize) -> Self {
        EvalConfig { design, sync, threads }
    }
}

/// Per-thread evaluation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub tabled_calls: u64,
    /// Answers produced by clause resolution for a tabled subgoal.
    pub derivations: u64,
    pub new_answer_calls: u64,
    pub new_for_thread: u64,
    /// Answers taken from other threads' work in a shared answer trie.
    pub absorbed: u64,
    pub rounds: u64,
    pub completed_sccs: u64,
    /// Answers consumed from frames still evaluating, inside their SCC.
    pub incomplete_consumptions: u64,
    /// Answers consumed from an evaluating frame by a caller outside its
    /// SCC. Local evaluation keeps this at zero.
    pub escaped_consumptions: u64,
}

/// Read-only view of a program with first-argument fact indexes.
pub struct Knowledge<'p> {
    program: &'p Program,
    rules: HashMap<Pred, Vec<&'p Clause>>,
    facts: HashMap<Pred, FactIndex<'p>>,
    round_limit: u64,
}

struct FactIndex<'p> {
    rows: &'p [Vec<Term>],
    by_first: HashMap<&'p Term, Vec<usize>>,
}

impl<'p> Knowledge<'p> {
    pub fn new(program: &'p Program) -> Self {
        let mut rules: HashMap<Pred, Vec<&Clause>> = HashMap::new();
        for c in program.rules() {
            rules.entry(c.head.pred).or_default().push(c);
        }
        let mut constants = BTreeSet::new();
        let mut facts = HashMap::new();
        for pred in program.fact_preds() {
            let rows = program.facts(pred);
            let mut by_first: HashMap<&Term, Vec<usize>> = HashMap::new();
            for (i, row) in rows.iter().enumerate() {
                constants.extend(row.iter());
                if let Some(first) = row.first() {
                    by_first.entry(first).or_default().push(i);
                }
            }
            facts.insert(pred, FactIndex { rows, by_first });
        }
        for c in program.rules() {
            for lit in std::iter::once(&c.head).chain(&c.body) {
                constants.extend(lit.args.iter().filter(|a| a.is_ground()));
            }
        }
        // Every continuing round adds an answer or a subgoal, both bounded by
        // the number of call/answer patterns over the program's constants.
        let round_limit = program
            .preds()
            .iter()
            .map(|p| (constants.len() as u64 + u64::from(p.arity)).saturating_pow(p.arity))
            .fold(1u64, u64::saturating_add);
        Knowledge { program, rules, facts, round_limit }
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    pub fn round_limit(&self) -> u64 {
        self.round_limit
    }
}

type Cont<'c, 'k, 'ts> = &'c mut dyn FnMut(&mut Worker<'k, 'ts>, &[Term]) -> Result<(), EngineError>;

struct StackEntry<'ts> {
    frame: &'ts SubgoalFrame,
    call: Literal,
    dfn: usize,
    low: usize,
}

struct Worker<'k, 'ts> {
    kb: &'k Knowledge<'k>,
    ts: &'ts TableSpace,
    thread: usize,
    stack: Vec<StackEntry<'ts>>,
    next_dfn: usize,
    /// Calls that found their frame still evaluating on this thread.
    live_calls: u64,
    stats: EvalStats,
}

impl<'k, 'ts> Worker<'k, 'ts> {
    fn new(kb: &'k Knowledge<'k>, ts: &'ts TableSpace, thread: usize) -> Self {
        Worker { kb, ts, thread, stack: Vec::new(), next_dfn: 0, live_calls: 0, stats: EvalStats::default() }
    }

    fn solve_literal(&mut self, goal: &Literal, k: Cont<'_, 'k, 'ts>) -> Result<(), EngineError> {
        if self.kb.program.is_tabled(goal.pred) {
            return self.call_tabled(goal, k);
        }
        self.match_facts(goal, k)?;
        let kb = self.kb;
        if let Some(rules) = kb.rules.get(&goal.pred) {
            for clause in rules {
                self.resolve_clause(clause, goal, k)?;
            }
        }
        Ok(())
    }

    fn match_facts(&mut self, goal: &Literal, k: Cont<'_, 'k, 'ts>) -> Result<(), EngineError> {
        let kb = self.kb;
        let Some(index) = kb.facts.get(&goal.pred) else { return Ok(()) };
        match goal.args.first() {
            Some(first) if first.is_ground() => {
                if let Some(rows) = index.by_first.get(first) {
                    for &i in rows {
                        let row = &index.rows[i];
                        if instance_of(&goal.args, row) {
                            k(self, row)?;
                        }
                    }
                }
            }
            _ => {
                for row in index.rows {
                    if instance_of(&goal.args, row) {
                        k(self, row)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn resolve_clause(&mut self, clause: &'k Clause, goal: &Literal, k: Cont<'_, 'k, 'ts>) -> Result<(), EngineError> {
        let mut bindings: Vec<Option<Term>> = vec![None; clause.num_vars as usize];
        for (h, g) in clause.head.args.iter().zip(&goal.args) {
            if matches!(g, Term::Var(_)) {
                continue;
            }
            match h {
                Term::Var(v) => match &bindings[*v as usize] {
                    Some(bound) if bound != g => return Ok(()),
                    Some(_) => {}
                    None => bindings[*v as usize] = Some(g.clone()),
                },
                constant if constant != g => return Ok(()),
                _ => {}
            }
        }
        self.solve_body(clause, 0, &mut bindings, goal, k)
    }

    fn solve_body(
        &mut self,
        clause: &'k Clause,
        at: usize,
        bindings: &mut Vec<Option<Term>>,
        goal: &Literal,
        k: Cont<'_, 'k, 'ts>,
    ) -> Result<(), EngineError> {
        let Some(lit) = clause.body.get(at) else {
            let head: Vec<Term> = clause.head.args.iter().map(|a| substitute(a, bindings)).collect();
            if instance_of(&goal.args, &head) {
                k(self, &head)?;
            }
            return Ok(());
        };
        let call = Literal { pred: lit.pred, args: lit.args.iter().map(|a| substitute(a, bindings)).collect() };
        let mut on_solution = |w: &mut Worker<'k, 'ts>, row: &[Term]| {
            let mut bound: Vec<VarId> = Vec::new();
            let mut consistent = true;
            for (a, value) in call.args.iter().zip(row) {
                if let Term::Var(v) = a {
                    match &bindings[*v as usize] {
                        Some(existing) => consistent &= existing == value,
                        None => {
                            bindings[*v as usize] = Some(value.clone());
                            bound.push(*v);
                        }
                    }
                }
            }
            let result = if consistent { w.solve_body(clause, at + 1, bindings, goal, k) } else { Ok(()) };
            for v in bound {
                bindings[v as usize] = None;
            }
            result
        };
        self.solve_literal(&call, &mut on_solution)
    }

    fn call_tabled(&mut self, goal: &Literal, k: Cont<'_, 'k, 'ts>) -> Result<(), EngineError> {
        self.stats.tabled_calls += 1;
        let call = canonical_call(goal);
        let (frame, _) = self.ts.tabled_subgoal_call(&call.to_term(), self.thread)?;
        if frame.is_complete() {
            return self.consume(frame, &call, k);
        }
        match frame.dfn() {
            Some(dfn) => {
                self.live_calls += 1;
                self.link(dfn);
                self.consume(frame, &call, k)
            }
            None => {
                self.generate(frame, &call)?;
                self.consume(frame, &call, k)
            }
        }
    }

    /// Feeds the answers `frame` holds for this thread to `k`, including
    /// answers appended while iterating.
    fn consume(&mut self, frame: &'ts SubgoalFrame, call: &Literal, k: Cont<'_, 'k, 'ts>) -> Result<(), EngineError> {
        let complete = frame.is_complete();
        if !complete {
            let inside = frame.dfn().is_some_and(|d| self.stack_position(d).is_some());
            if !inside {
                self.stats.escaped_consumptions += 1;
            }
        }
        let mut i = 0;
        while let Some(answer) = frame.known_answer(i) {
            let answer = answer?;
            i += 1;
            if !complete {
                self.stats.incomplete_consumptions += 1;
            }
            let row: Vec<Term> = call
                .args
                .iter()
                .map(|a| match a {
                    Term::Var(v) => answer[*v as usize].clone(),
                    constant => constant.clone(),
                })
                .collect();
            k(self, &row)?;
        }
        Ok(())
    }

    fn stack_position(&self, dfn: usize) -> Option<usize> {
        self.stack.binary_search_by_key(&dfn, |e| e.dfn).ok()
    }

    /// Merges every stack entry from `dfn` up to the top into one SCC.
    fn link(&mut self, dfn: usize) {
        let Some(pos) = self.stack_position(dfn) else { return };
        let low = self.stack[pos].low;
        for entry in &mut self.stack[pos..] {
            entry.low = entry.low.min(low);
        }
    }

    fn generate(&mut self, frame: &'ts SubgoalFrame, call: &Literal) -> Result<(), EngineError> {
        let dfn = self.next_dfn;
        self.next_dfn += 1;
        frame.set_dfn(dfn);
        self.stack.push(StackEntry { frame, call: call.clone(), dfn, low: dfn });
        self.stats.absorbed += self.ts.absorb_shared_answers(frame) as u64;

        let live_before = self.live_calls;
        self.derive(frame, call)?;
        let pos = self.stack_position(dfn).expect("generator left the dependency stack");
        if self.stack[pos].low != dfn {
            // Part of an older SCC; its leader completes it.
            return Ok(());
        }

        let self_contained = self.live_calls == live_before && self.stack.len() == pos + 1;
        if !self_contained {
            self.fixpoint(pos)?;
        }
        let members: Vec<&SubgoalFrame> = self.stack[pos..].iter().map(|e| e.frame).collect();
        self.ts.mark_complete(members)?;
        self.stack.truncate(pos);
        self.stats.completed_sccs += 1;
        Ok(())
    }

    /// Re-derives the SCC starting at stack position `pos`, newest member
    /// first, until a round produces nothing new for this thread.
    fn fixpoint(&mut self, pos: usize) -> Result<(), EngineError> {
        let limit = self.kb.round_limit;
        let mut rounds = 0;
        loop {
            rounds += 1;
            self.stats.rounds += 1;
            if rounds > limit {
                let call = self.stack[pos].call.to_term();
                return Err(EngineError::Watchdog {
                    subgoal: call.display(&self.kb.program.symbols).to_string(),
                    limit,
                });
            }
            let members_before = self.stack.len();
            let mut changed = false;
            let mut i = self.stack.len();
            while i > pos {
                i -= 1;
                let frame = self.stack[i].frame;
                let call = self.stack[i].call.clone();
                changed |= self.derive(frame, &call)?;
            }
            changed |= self.stack.len() != members_before;
            if !changed {
                return Ok(());
            }
        }
    }

    /// Runs every clause of the subgoal once, storing each derived answer.
    /// Returns whether any answer was new for this thread.
    fn derive(&mut self, frame: &'ts SubgoalFrame, call: &Literal) -> Result<bool, EngineError> {
        let mut changed = false;
        let mut store = |w: &mut Worker<'k, 'ts>, row: &[Term]| {
            w.stats.derivations += 1;
            let answer = answer_bindings(call, row);
            let new = w.ts.new_answer(frame, &answer)?;
            w.stats.new_answer_calls += 1;
            if new {
                w.stats.new_for_thread += 1;
                changed = true;
            }
            // Always "fail" back into the derivation.
            Ok(())
        };
        self.match_facts(call, &mut store)?;
        let kb = self.kb;
        if let Some(rules) = kb.rules.get(&call.pred) {
            for clause in rules {
                self.resolve_clause(clause, call, &mut store)?;
            }
        }
        Ok(changed)
    }
}

/// Renames the goal's variables to `V0, V1, ...` by first occurrence.
fn canonical_call(goal: &Literal) -> Literal {
    let mut map: Vec<(VarId, VarId)> = Vec::new();
    let args = goal
        .args
        .iter()
        .map(|a| match a {
            Term::Var(v) => {
                let id = match map.iter().find(|(from, _)| from == v) {
                    Some(&(_, to)) => to,
                    None => {
                        let to = map.len() as VarId;
                        map.push((*v, to));
                        to
                    }
                };
                Term::Var(id)
            }
            other => other.clone(),
        })
        .collect();
    Literal { pred: goal.pred, args }
}

/// Values of the canonical call's variables, in variable order.
fn answer_bindings(call: &Literal, row: &[Term]) -> Vec<Term> {
    let mut out = Vec::new();
    for (a, value) in call.args.iter().zip(row) {
        if let Term::Var(v) = a {
            if *v as usize == out.len() {
                out.push(value.clone());
            }
        }
    }
    out
}

fn substitute(t: &Term, bindings: &[Option<Term>]) -> Term {
    match t {
        Term::Var(v) => bindings[*v as usize].clone().unwrap_or(Term::Var(*v)),
        other => other.clone(),
    }
}

/// Whether the ground `row` is an instance of `pattern` (constants equal,
/// repeated variables bound consistently).
fn instance_of(pattern: &[Term], row: &[Term]) -> bool {
    if pattern.len() != row.len() {
        return false;
    }
    let mut seen: Vec<(VarId, &Term)> = Vec::new();
    for (p, value) in pattern.iter().zip(row) {
        match p {
            Term::Var(v) => match seen.iter().find(|(w, _)| w == v) {
                Some((_, bound)) if *bound != value => return false,
                Some(_) => {}
                None => seen.push((*v, value)),
            },
            constant if constant != value => return false,
            _ => {}
        }
    }
    true
}

/// Result of one worker.
#[derive(Debug, Clone)]
pub struct ThreadOutcome {
    pub answers: AnswerSet,
    pub stats: EvalStats,
}

fn run_worker(
    kb: &Knowledge<'_>,
    query: &Literal,
    thread: usize,
    ts: &TableSpace,
) -> Result<ThreadOutcome, EngineError> {
    let mut worker = Worker::new(kb, ts, thread);
    let mut answers = AnswerSet::new();
    let mut collect = |_: &mut Worker<'_, '_>, row: &[Term]| {
        answers.insert(row.to_vec());
        Ok(())
    };
    worker.solve_literal(query, &mut collect)?;
    debug_assert!(worker.stack.is_empty());
    Ok(ThreadOutcome { answers, stats: worker.stats })
}

/// Evaluates `query` as thread `thread` against a caller-provided table
/// space, which may be shared with other threads.
pub fn solve_thread(
    program: &Program,
    query: &Term,
    thread: usize,
    ts: &TableSpace,
) -> Result<ThreadOutcome, EngineError> {
    program.check_tabling()?;
    let query = Literal::from_term(query)?;
    run_worker(&Knowledge::new(program), &query, thread, ts)
}

/// Single-threaded convenience wrapper.
pub fn solve(program: &Program, query: &Term, design: Design, sync: SyncMode) -> Result<AnswerSet, EngineError> {
    let outcome = solve_parallel(program, query, EvalConfig::new(design, sync, 1))?;
    Ok(outcome.threads.into_iter().next().map(|t| t.answers).unwrap_or_default())
}

#[derive(Debug, Clone)]
pub struct ParallelOutcome {
    pub threads: Vec<ThreadOutcome>,
    pub counters: MemoryCounters,
    /// Private structures tallied as removed when each thread finished.
    pub released: MemoryCounters,
    pub elapsed: Duration,
}

impl ParallelOutcome {
    pub fn answer_sets(&self) -> impl Iterator<Item = &AnswerSet> {
        self.threads.iter().map(|t| &t.answers)
    }
}

/// Runs `cfg.threads` workers that all evaluate the same query, and reports
/// their answers, the table space counters and the wall time between the
/// common start and the last join.
pub fn solve_parallel(program: &Program, query: &Term, cfg: EvalConfig) -> Result<ParallelOutcome, EngineError> {
    if cfg.threads == 0 || cfg.threads > MAX_THREADS {
        return Err(EngineError::Threads(cfg.threads));
    }
    program.check_tabling()?;
    let query = Literal::from_term(query)?;
    let ts = TableSpace::new(program.tabled(), cfg.design, cfg.sync)?;
    let kb = Knowledge::new(program);
    let barrier = Barrier::new(cfg.threads + 1);

    let (results, elapsed) = std::thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.threads)
            .map(|thread| {
                let (kb, ts, barrier, query) = (&kb, &ts, &barrier, &query);
                std::thread::Builder::new()
                    .name(format!("worker-{thread}"))
                    .stack_size(WORKER_STACK)
                    .spawn_scoped(s, move || {
                        barrier.wait();
                        run_worker(kb, query, thread, ts)
                    })
                    .expect("failed to spawn worker thread")
            })
            .collect();
        barrier.wait();
        let start = Instant::now();
        let results: Vec<_> = handles
            .into_iter()
            .enumerate()
            .map(|(i, h)| h.join().unwrap_or(Err(EngineError::WorkerPanic(i))))
            .collect();
        (results, start.elapsed())
    });

    let threads = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let counters = ts.snapshot_counters();
    for thread in 0..cfg.threads {
        ts.release_thread(thread);
    }
    Ok(ParallelOutcome { threads, counters, released: ts.released_counters(), elapsed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::Literal;

    /// path/2 over the given edges, left or right recursive.
    fn path_program(edges: &[(i64, i64)], left: bool) -> (Program, Term) {
        let mut p = Program::new();
        let path = p.intern("path");
        let edge = p.intern("edge");
        p.declare_tabled(Pred { name: path, arity: 2 });
        let (x, y, z) = (Term::Var(0), Term::Var(1), Term::Var(2));
        let body = if left {
            vec![Literal::new(path, vec![x.clone(), y.clone()]), Literal::new(edge, vec![y, z.clone()])]
        } else {
            vec![Literal::new(edge, vec![x.clone(), y.clone()]), Literal::new(path, vec![y, z.clone()])]
        };
        p.add_rule(Literal::new(path, vec![x.clone(), z.clone()]), body).unwrap();
        p.add_rule(Literal::new(path, vec![x.clone(), z.clone()]), vec![Literal::new(edge, vec![x, z])]).unwrap();
        for &(a, b) in edges {
            p.add_fact(Literal::new(edge, vec![Term::Int(a), Term::Int(b)])).unwrap();
        }
        let q = Term::compound(path, vec![Term::Var(0), Term::Var(1)]);
        (p, q)
    }

    /// Reachability by BFS from every node.
    fn closure(edges: &[(i64, i64)]) -> AnswerSet {
        let mut out = AnswerSet::new();
        let nodes: BTreeSet<i64> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        for &start in &nodes {
            let mut frontier = vec![start];
            let mut seen = BTreeSet::new();
            while let Some(n) = frontier.pop() {
                for &(a, b) in edges {
                    if a == n && seen.insert(b) {
                        frontier.push(b);
                    }
                }
            }
            out.extend(seen.into_iter().map(|b| vec![Term::Int(start), Term::Int(b)]));
        }
        out
    }

    const CYCLE3: [(i64, i64); 3] = [(1, 2), (2, 3), (3, 1)];
    const BTREE3: [(i64, i64); 6] = [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (3, 7)];

    #[test]
    fn cycle_and_tree_closures() {
        assert_eq!(closure(&CYCLE3).len(), 9);
        assert_eq!(closure(&BTREE3).len(), 10);
        for left in [true, false] {
            for design in Design::ALL {
                let sync = if design.shares_tries() { SyncMode::TryLock } else { SyncMode::None };
                let (p, q) = path_program(&CYCLE3, left);
                assert_eq!(solve(&p, &q, design, sync).unwrap(), closure(&CYCLE3));
                let (p, q) = path_program(&BTREE3, left);
                assert_eq!(solve(&p, &q, design, sync).unwrap(), closure(&BTREE3));
            }
        }
    }

    #[test]
    fn bound_queries_and_repeated_variables() {
        let (mut p, _) = path_program(&CYCLE3, false);
        let path = p.intern("path");
        let from_two = Term::compound(path, vec![Term::Int(2), Term::Var(5)]);
        let got = solve(&p, &from_two, Design::Fs, SyncMode::Lock).unwrap();
        assert_eq!(got, closure(&CYCLE3).into_iter().filter(|r| r[0] == Term::Int(2)).collect());
        let loops = Term::compound(path, vec![Term::Var(3), Term::Var(3)]);
        let got = solve(&p, &loops, Design::Ns, SyncMode::None).unwrap();
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn no_matching_facts_gives_empty_complete_table() {
        let (mut p, _) = path_program(&CYCLE3, true);
        let path = p.intern("path");
        let q = Term::compound(path, vec![Term::Int(42), Term::Var(0)]);
        let ts = TableSpace::new(p.tabled(), Design::Ns, SyncMode::None).unwrap();
        let out = solve_thread(&p, &q, 0, &ts).unwrap();
        assert!(out.answers.is_empty());
        let (frame, created) =
            ts.tabled_subgoal_call(&Term::compound(path, vec![Term::Int(42), Term::Var(0)]), 0).unwrap();
        assert!(!created && frame.is_complete());
    }

    #[test]
    fn untabled_recursion_is_unsupported() {
        let mut p = Program::new();
        let r = p.intern("r");
        let e = p.intern("e");
        p.add_rule(
            Literal::new(r, vec![Term::Var(0), Term::Var(1)]),
            vec![Literal::new(r, vec![Term::Var(0), Term::Var(2)]), Literal::new(e, vec![Term::Var(2), Term::Var(1)])],
        )
        .unwrap();
        let q = Term::compound(r, vec![Term::Var(0), Term::Var(1)]);
        assert!(matches!(
            solve(&p, &q, Design::Ns, SyncMode::None),
            Err(EngineError::Program(ProgramError::UntabledRecursion(_)))
        ));
    }

    #[test]
    fn single_thread_matches_solve_thread() {
        let (p, q) = path_program(&CYCLE3, true);
        let par = solve_parallel(&p, &q, EvalConfig::new(Design::Fs, SyncMode::TryLock, 1)).unwrap();
        let ts = TableSpace::new(p.tabled(), Design::Fs, SyncMode::TryLock).unwrap();
        let one = solve_thread(&p, &q, 0, &ts).unwrap();
        assert_eq!(par.threads[0].answers, one.answers);
        assert_eq!(par.counters, ts.snapshot_counters());
    }

    #[test]
    fn local_evaluation_discipline_holds() {
        for left in [true, false] {
            let (p, q) = path_program(&CYCLE3, left);
            for design in Design::ALL {
                let sync = if design.shares_tries() { SyncMode::Lock } else { SyncMode::None };
                let out = solve_parallel(&p, &q, EvalConfig::new(design, sync, 4)).unwrap();
                for t in &out.threads {
                    assert_eq!(t.stats.escaped_consumptions, 0);
                    assert_eq!(t.stats.derivations, t.stats.new_answer_calls);
                    assert!(t.stats.rounds <= Knowledge::new(&p).round_limit());
                }
            }
        }
    }

    #[test]
    fn thread_count_is_validated() {
        let (p, q) = path_program(&CYCLE3, true);
        for threads in [0, MAX_THREADS + 1] {
            assert!(matches!(
                solve_parallel(&p, &q, EvalConfig::new(Design::Ns, SyncMode::None, threads)),
                Err(EngineError::Threads(_))
            ));
        }
    }

    #[test]
    fn canonical_call_numbers_by_first_occurrence() {
        let mut p = Program::new();
        let f = p.intern("f");
        let lit = Literal::new(f, vec![Term::Var(7), Term::Int(1), Term::Var(3), Term::Var(7)]);
        let c = canonical_call(&lit);
        assert_eq!(c.args, vec![Term::Var(0), Term::Int(1), Term::Var(1), Term::Var(0)]);
        let row = vec![Term::Int(5), Term::Int(1), Term::Int(6), Term::Int(5)];
        assert_eq!(answer_bindings(&c, &row), vec![Term::Int(5), Term::Int(6)]);
    }
}
