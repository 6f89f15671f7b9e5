//! Allocation counts at several thread counts against the single-thread run,
//! for each design.

use mttab::bench::{make_program, path_query, BenchInstance};
use mttab::engine::{solve_parallel, EvalConfig};
use mttab::tablespace::Design;
use mttab::trie::SyncMode;

pub fn run_example() {
    let bench: BenchInstance = "pathright:btree:6".parse().unwrap();
    let mut program = make_program(&bench, false).unwrap();
    let query = path_query(&mut program);

    for design in Design::ALL {
        let one = solve_parallel(&program, &query, EvalConfig::new(design, SyncMode::Lock, 1)).unwrap().counters;
        for nt in [2u64, 4, 8] {
            let c = solve_parallel(&program, &query, EvalConfig::new(design, SyncMode::Lock, nt as usize))
                .unwrap()
                .counters;
            println!("{} NT={nt}: sts {}/{} ats {}/{} sf {}", design.name(), c.sts, one.sts, c.ats, one.ats, c.sf);
            assert_eq!(c.sf, nt * one.sf);
            let (sts, ats) = match design {
                Design::Ns => (nt * one.sts, nt * one.ats),
                Design::Ss => (one.sts, nt * one.ats),
                Design::Fs => (one.sts, one.ats),
            };
            assert_eq!((c.sts, c.ats), (sts, ats));
            if design == Design::Fs {
                assert_eq!(c.se, one.sf);
            }
        }
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
