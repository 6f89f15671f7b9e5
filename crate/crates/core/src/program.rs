//! Datalog programs: tabling declarations, rules and ground facts.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::term::{Sym, SymbolTable, Term, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pred {
    pub name: Sym,
    pub arity: u32,
}

/// `pred(args...)` where every argument is a constant or a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub pred: Pred,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(name: Sym, args: Vec<Term>) -> Self {
        Literal { pred: Pred { name, arity: args.len() as u32 }, args }
    }

    pub fn from_term(t: &Term) -> Result<Self, ProgramError> {
        let (name, _) = t.functor().ok_or(ProgramError::NotAnAtom)?;
        let lit = Literal::new(name, t.args().to_vec());
        if lit.args.iter().any(|a| matches!(a, Term::Compound(..))) {
            return Err(ProgramError::NonDatalog);
        }
        Ok(lit)
    }

    pub fn to_term(&self) -> Term {
        Term::compound(self.pred.name, self.args.clone())
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.args.iter().filter_map(|a| match a {
            Term::Var(v) => Some(*v),
            _ => None,
        })
    }
}

/// `head :- body.` with clause-local variables `0..num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub head: Literal,
    pub body: Vec<Literal>,
    pub num_vars: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("expected an atom or compound term")]
    NotAnAtom,
    #[error("argument is a compound term; only Datalog programs are supported")]
    NonDatalog,
    #[error("fact is not ground")]
    NonGroundFact,
    #[error("head variable {0} does not occur in the clause body")]
    NotRangeRestricted(String),
    #[error("predicate {0} is recursive but not tabled")]
    UntabledRecursion(String),
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub symbols: SymbolTable,
    tabled: BTreeSet<Pred>,
    rules: Vec<Clause>,
    facts: BTreeMap<Pred, Vec<Vec<Term>>>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> Sym {
        self.symbols.intern(name)
    }

    pub fn declare_tabled(&mut self, pred: Pred) {
        self.tabled.insert(pred);
    }

    pub fn is_tabled(&self, pred: Pred) -> bool {
        self.tabled.contains(&pred)
    }

    pub fn tabled(&self) -> impl Iterator<Item = Pred> + '_ {
        self.tabled.iter().copied()
    }

    /// Adds a rule after renumbering its variables to `0..n` and checking
    /// range restriction.
    pub fn add_rule(&mut self, head: Literal, body: Vec<Literal>) -> Result<(), ProgramError> {
        if body.is_empty() {
            return self.add_fact(head);
        }
        let body_vars: HashSet<VarId> = body.iter().flat_map(Literal::vars).collect();
        if let Some(v) = head.vars().find(|v| !body_vars.contains(v)) {
            return Err(ProgramError::NotRangeRestricted(format!("V{v}")));
        }
        let mut map = std::collections::HashMap::new();
        let mut renumber = |lit: &Literal| Literal {
            pred: lit.pred,
            args: lit
                .args
                .iter()
                .map(|a| match a {
                    Term::Var(v) => {
                        let next = map.len() as VarId;
                        Term::Var(*map.entry(*v).or_insert(next))
                    }
                    other => other.clone(),
                })
                .collect(),
        };
        let head = renumber(&head);
        let body: Vec<Literal> = body.iter().map(&mut renumber).collect();
        let num_vars = map.len() as u32;
        self.rules.push(Clause { head, body, num_vars });
        Ok(())
    }

    pub fn add_fact(&mut self, fact: Literal) -> Result<(), ProgramError> {
        if !fact.args.iter().all(Term::is_ground) {
            return Err(ProgramError::NonGroundFact);
        }
        self.facts.entry(fact.pred).or_default().push(fact.args);
        Ok(())
    }

    pub fn rules(&self) -> &[Clause] {
        &self.rules
    }

    pub fn rules_for(&self, pred: Pred) -> impl Iterator<Item = &Clause> {
        self.rules.iter().filter(move |c| c.head.pred == pred)
    }

    pub fn facts(&self, pred: Pred) -> &[Vec<Term>] {
        self.facts.get(&pred).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn fact_preds(&self) -> impl Iterator<Item = Pred> + '_ {
        self.facts.keys().copied()
    }

    pub fn fact_count(&self) -> usize {
        self.facts.values().map(Vec::len).sum()
    }

    /// Every predicate named anywhere in the program.
    pub fn preds(&self) -> BTreeSet<Pred> {
        let mut out: BTreeSet<Pred> = self.tabled.iter().copied().collect();
        out.extend(self.facts.keys().copied());
        for c in &self.rules {
            out.insert(c.head.pred);
            out.extend(c.body.iter().map(|l| l.pred));
        }
        out
    }

    pub fn pred_name(&self, pred: Pred) -> String {
        format!("{}/{}", self.symbols.name(pred.name), pred.arity)
    }

    /// Rejects recursive predicates that are not tabled.
    pub fn check_tabling(&self) -> Result<(), ProgramError> {
        let preds: Vec<Pred> = self.preds().into_iter().collect();
        let index: std::collections::HashMap<Pred, usize> = preds.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut edges = vec![Vec::new(); preds.len()];
        for c in &self.rules {
            for lit in &c.body {
                edges[index[&c.head.pred]].push(index[&lit.pred]);
            }
        }
        for component in strongly_connected(&edges) {
            let recursive = component.len() > 1 || edges[component[0]].contains(&component[0]);
            if !recursive {
                continue;
            }
            if let Some(&p) = component.iter().find(|&&p| !self.is_tabled(preds[p])) {
                return Err(ProgramError::UntabledRecursion(self.pred_name(preds[p])));
            }
        }
        Ok(())
    }

    /// Renders the program in the text format accepted by
    /// [`crate::cli::parse_program`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.tabled {
            let _ = writeln!(out, ":- table {}.", self.pred_name(*p));
        }
        for c in &self.rules {
            let head = self.literal_text(&c.head);
            let body: Vec<String> = c.body.iter().map(|l| self.literal_text(l)).collect();
            let _ = writeln!(out, "{head} :- {}.", body.join(", "));
        }
        for (pred, rows) in &self.facts {
            for row in rows {
                let _ = writeln!(out, "{}.", self.literal_text(&Literal { pred: *pred, args: row.clone() }));
            }
        }
        out
    }

    fn literal_text(&self, lit: &Literal) -> String {
        let name = self.symbols.name(lit.pred.name);
        if lit.args.is_empty() {
            return name.to_owned();
        }
        let args: Vec<String> = lit
            .args
            .iter()
            .map(|a| match a {
                Term::Var(v) => format!("V{v}"),
                other => other.display(&self.symbols).to_string(),
            })
            .collect();
        format!("{name}({})", args.join(","))
    }
}

/// Tarjan's algorithm over an adjacency list; components in reverse
/// topological order.
pub(crate) fn strongly_connected(edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        edges: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }

    fn visit(s: &mut State<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in &s.edges[v] {
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut component = Vec::new();
            loop {
                let w = s.stack.pop().expect("tarjan stack underflow");
                s.on_stack[w] = false;
                component.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(component);
        }
    }

    let n = edges.len();
    let mut s = State {
        edges,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_program(tabled: bool) -> Program {
        let mut p = Program::new();
        let path = p.intern("path");
        let edge = p.intern("edge");
        if tabled {
            p.declare_tabled(Pred { name: path, arity: 2 });
        }
        let (x, y, z) = (Term::Var(10), Term::Var(11), Term::Var(12));
        p.add_rule(
            Literal::new(path, vec![x.clone(), z.clone()]),
            vec![Literal::new(path, vec![x.clone(), y.clone()]), Literal::new(edge, vec![y, z.clone()])],
        )
        .unwrap();
        p.add_rule(Literal::new(path, vec![x.clone(), z.clone()]), vec![Literal::new(edge, vec![x, z])]).unwrap();
        p.add_fact(Literal::new(edge, vec![Term::Int(1), Term::Int(2)])).unwrap();
        p
    }

    #[test]
    fn rules_are_renumbered_from_zero() {
        let p = path_program(true);
        let c = &p.rules()[0];
        assert_eq!(c.num_vars, 3);
        assert_eq!(c.head.args, vec![Term::Var(0), Term::Var(1)]);
        assert_eq!(c.body[0].args, vec![Term::Var(0), Term::Var(2)]);
    }

    #[test]
    fn range_restriction_is_enforced() {
        let mut p = Program::new();
        let q = p.intern("q");
        let r = p.intern("r");
        let err = p
            .add_rule(Literal::new(q, vec![Term::Var(0), Term::Var(1)]), vec![Literal::new(r, vec![Term::Var(0)])])
            .unwrap_err();
        assert!(matches!(err, ProgramError::NotRangeRestricted(_)));
        assert_eq!(p.add_fact(Literal::new(r, vec![Term::Var(0)])), Err(ProgramError::NonGroundFact));
    }

    #[test]
    fn untabled_recursion_is_rejected() {
        assert!(path_program(true).check_tabling().is_ok());
        assert!(matches!(
            path_program(false).check_tabling(),
            Err(ProgramError::UntabledRecursion(name)) if name == "path/2"
        ));
    }

    #[test]
    fn scc_groups_mutual_recursion() {
        let comps = strongly_connected(&[vec![1], vec![0, 2], vec![]]);
        let mut sizes: Vec<usize> = comps.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
        // reverse topological: the sink comes first
        assert_eq!(comps[0], vec![2]);
    }
}
