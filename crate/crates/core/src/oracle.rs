//! Bottom-up reference evaluation.
//!
//! Shares nothing with the tabling engine beyond the term and program types:
//! relations are plain hash sets and rules are evaluated by nested-loop joins.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::program::{Clause, Literal, Pred, Program};
use crate::term::Term;

/// Ground tuples per predicate.
pub type FactStore = HashMap<Pred, HashSet<Vec<Term>>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("not a Datalog program: {0}")]
    Unsupported(String),
}

fn check_datalog(program: &Program, query: &Term) -> Result<Literal, OracleError> {
    let query = Literal::from_term(query).map_err(|e| OracleError::Unsupported(e.to_string()))?;
    for c in program.rules() {
        for lit in std::iter::once(&c.head).chain(&c.body) {
            if lit.args.iter().any(|a| matches!(a, Term::Compound(..))) {
                return Err(OracleError::Unsupported(format!(
                    "compound argument in a clause for {}",
                    program.pred_name(c.head.pred)
                )));
            }
        }
    }
    Ok(query)
}

/// All ground instances of `query` in the minimal model, computed
/// semi-naively.
pub fn oracle_solve(program: &Program, query: &Term) -> Result<BTreeSet<Vec<Term>>, OracleError> {
    let query = check_datalog(program, query)?;
    let model = semi_naive_model(program);
    Ok(select(&model, &query))
}

pub fn select(model: &FactStore, query: &Literal) -> BTreeSet<Vec<Term>> {
    model
        .get(&query.pred)
        .map(|rows| rows.iter().filter(|r| pattern_matches(&query.args, r)).cloned().collect())
        .unwrap_or_default()
}

fn pattern_matches(pattern: &[Term], row: &[Term]) -> bool {
    let mut env: HashMap<u32, &Term> = HashMap::new();
    pattern.len() == row.len()
        && pattern.iter().zip(row).all(|(p, v)| match p {
            Term::Var(x) => *env.entry(*x).or_insert(v) == v,
            c => c == v,
        })
}

fn edb(program: &Program) -> FactStore {
    let mut store = FactStore::new();
    for pred in program.fact_preds() {
        store.entry(pred).or_default().extend(program.facts(pred).iter().cloned());
    }
    store
}

/// Minimal model by repeated full application of every rule.
pub fn naive_model(program: &Program) -> FactStore {
    let mut total = edb(program);
    loop {
        let mut added = false;
        for rule in program.rules() {
            let sources: Vec<&FactStore> = vec![&total; rule.body.len()];
            let derived = fire(rule, &sources);
            if derived.is_empty() {
                continue;
            }
            let rel = total.entry(rule.head.pred).or_default();
            let before = rel.len();
            rel.extend(derived);
            added |= rel.len() != before;
        }
        if !added {
            return total;
        }
    }
}

/// Minimal model where each rule application joins at least one tuple that
/// was new in the previous iteration.
pub fn semi_naive_model(program: &Program) -> FactStore {
    let mut total = edb(program);
    let mut delta = total.clone();
    loop {
        let mut fresh = FactStore::new();
        for rule in program.rules() {
            for i in 0..rule.body.len() {
                if delta.get(&rule.body[i].pred).is_none_or(HashSet::is_empty) {
                    continue;
                }
                let sources: Vec<&FactStore> =
                    (0..rule.body.len()).map(|j| if j == i { &delta } else { &total }).collect();
                for row in fire(rule, &sources) {
                    if !total.get(&rule.head.pred).is_some_and(|r| r.contains(&row)) {
                        fresh.entry(rule.head.pred).or_default().insert(row);
                    }
                }
            }
        }
        if fresh.values().all(HashSet::is_empty) {
            return total;
        }
        for (pred, rows) in &fresh {
            total.entry(*pred).or_default().extend(rows.iter().cloned());
        }
        delta = fresh;
    }
}

/// Head instances of `rule` where body literal `j` is matched in `sources[j]`.
fn fire(rule: &Clause, sources: &[&FactStore]) -> Vec<Vec<Term>> {
    let mut out = Vec::new();
    let mut env: Vec<Option<Term>> = vec![None; rule.num_vars as usize];
    join(rule, sources, 0, &mut env, &mut out);
    out
}

fn join(rule: &Clause, sources: &[&FactStore], at: usize, env: &mut Vec<Option<Term>>, out: &mut Vec<Vec<Term>>) {
    if at == rule.body.len() {
        out.push(
            rule.head
                .args
                .iter()
                .map(|a| match a {
                    Term::Var(v) => env[*v as usize].clone().expect("range-restricted head"),
                    c => c.clone(),
                })
                .collect(),
        );
        return;
    }
    let lit = &rule.body[at];
    let Some(rows) = sources[at].get(&lit.pred) else { return };
    for row in rows {
        let mut newly = Vec::new();
        let mut ok = row.len() == lit.args.len();
        for (a, v) in lit.args.iter().zip(row) {
            if !ok {
                break;
            }
            match a {
                Term::Var(x) => match &env[*x as usize] {
                    Some(bound) => ok = bound == v,
                    None => {
                        env[*x as usize] = Some(v.clone());
                        newly.push(*x);
                    }
                },
                c => ok = c == v,
            }
        }
        if ok {
            join(rule, sources, at + 1, env, out);
        }
        for x in newly {
            env[x as usize] = None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn program(edges: &[(i64, i64)]) -> (Program, Term) {
        let mut p = Program::new();
        let path = p.intern("path");
        let edge = p.intern("edge");
        p.declare_tabled(Pred { name: path, arity: 2 });
        let (x, y, z) = (Term::Var(0), Term::Var(1), Term::Var(2));
        p.add_rule(
            Literal::new(path, vec![x.clone(), z.clone()]),
            vec![Literal::new(path, vec![x.clone(), y.clone()]), Literal::new(edge, vec![y, z.clone()])],
        )
        .unwrap();
        p.add_rule(Literal::new(path, vec![x.clone(), z.clone()]), vec![Literal::new(edge, vec![x, z])]).unwrap();
        for &(a, b) in edges {
            p.add_fact(Literal::new(edge, vec![Term::Int(a), Term::Int(b)])).unwrap();
        }
        let q = Term::compound(path, vec![Term::Var(0), Term::Var(1)]);
        (p, q)
    }

    #[test]
    fn cycle_of_three() {
        let (p, q) = program(&[(1, 2), (2, 3), (3, 1)]);
        assert_eq!(oracle_solve(&p, &q).unwrap().len(), 9);
    }

    #[test]
    fn single_edge() {
        let (p, q) = program(&[(1, 2)]);
        let got = oracle_solve(&p, &q).unwrap();
        assert_eq!(got, BTreeSet::from([vec![Term::Int(1), Term::Int(2)]]));
    }

    #[test]
    fn unsatisfiable_query() {
        let (mut p, _) = program(&[(1, 2)]);
        let nothing = p.intern("nothing");
        let q = Term::compound(nothing, vec![Term::Var(0)]);
        assert!(oracle_solve(&p, &q).unwrap().is_empty());
    }

    #[test]
    fn compound_arguments_are_unsupported() {
        let (mut p, _) = program(&[]);
        let r = p.intern("r");
        let f = p.intern("f");
        p.add_rule(
            Literal { pred: Pred { name: r, arity: 1 }, args: vec![Term::compound(f, vec![Term::Var(0)])] },
            vec![Literal::new(r, vec![Term::Var(0)])],
        )
        .unwrap();
        let q = Term::compound(r, vec![Term::Var(0)]);
        assert!(matches!(oracle_solve(&p, &q), Err(OracleError::Unsupported(_))));
    }

    #[test]
    fn semi_naive_equals_naive() {
        let graphs: [&[(i64, i64)]; 4] = [
            &[(1, 2), (2, 3), (3, 1)],
            &[(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (3, 7)],
            &[(1, 2), (2, 1), (2, 3), (3, 4), (4, 2), (5, 5)],
            &[],
        ];
        for g in graphs {
            let (p, _) = program(g);
            assert_eq!(semi_naive_model(&p), naive_model(&p));
        }
    }

    #[test]
    fn adding_a_fact_never_removes_answers() {
        let base = [(1, 2), (2, 3), (4, 5)];
        let (p, q) = program(&base);
        let before = oracle_solve(&p, &q).unwrap();
        for extra in [(3, 4), (5, 1), (6, 6)] {
            let mut edges = base.to_vec();
            edges.push(extra);
            let (p2, q2) = program(&edges);
            assert!(oracle_solve(&p2, &q2).unwrap().is_superset(&before));
        }
    }
}
