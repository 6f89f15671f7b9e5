//! Parse a tabled program, evaluate a query and compare with the bottom-up
//! oracle.

use mttab::cli::{parse_goal, parse_program};
use mttab::engine::solve;
use mttab::oracle::oracle_solve;
use mttab::tablespace::Design;
use mttab::trie::SyncMode;

const PROGRAM: &str = "
:- table path/2.
path(X,Z) :- path(X,Y), edge(Y,Z).
path(X,Z) :- edge(X,Z).

edge(a,b). edge(b,c). edge(c,a). edge(c,d).
";

pub fn run_example() {
    let mut program = parse_program(PROGRAM).unwrap();
    for goal in ["path(X,Y)", "path(d,Y)", "path(X,d)", "path(X,X)"] {
        let query = parse_goal(goal, &mut program.symbols).unwrap();
        let expected = oracle_solve(&program, &query).unwrap();
        let got = solve(&program, &query, Design::Fs, SyncMode::TryLock).unwrap();
        assert_eq!(got, expected, "{goal}");
        let shown: Vec<String> = got
            .iter()
            .map(|row| row.iter().map(|t| t.display(&program.symbols).to_string()).collect::<Vec<_>>().join(","))
            .collect();
        println!("{goal:<10} {:>2} answers: {}", got.len(), shown.join(" "));
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
