//! One subgoal called by four threads under each table-space design, with
//! the allocation counters that follow.

use mttab::program::Pred;
use mttab::tablespace::{Design, TableSpace};
use mttab::term::{SymbolTable, Term};
use mttab::trie::SyncMode;

const THREADS: usize = 4;

pub fn run_example() {
    let mut symbols = SymbolTable::new();
    let path = symbols.intern("path");
    let pred = Pred { name: path, arity: 2 };
    // path(1, V0) with answers V0 = 2, 3, 4.
    let call = Term::compound(path, vec![Term::Int(1), Term::Var(0)]);

    println!("{:<6} {:>3} {:>3} {:>4} {:>3} {:>3} {:>4}", "design", "te", "ba", "sts", "sf", "se", "ats");
    for design in Design::ALL {
        let ts = TableSpace::new([pred], design, SyncMode::TryLock).unwrap();
        std::thread::scope(|s| {
            for thread in 0..THREADS {
                let (ts, call) = (&ts, &call);
                s.spawn(move || {
                    let (frame, created) = ts.tabled_subgoal_call(call, thread).unwrap();
                    assert!(created);
                    for v in 2..=4 {
                        assert!(ts.new_answer(frame, &[Term::Int(v)]).unwrap());
                    }
                    assert!(!ts.new_answer(frame, &[Term::Int(3)]).unwrap());
                    ts.mark_complete([frame]).unwrap();
                    assert_eq!(ts.answers_of(frame).unwrap().len(), 3);
                });
            }
        });
        let c = ts.snapshot_counters();
        println!("{:<6} {:>3} {:>3} {:>4} {:>3} {:>3} {:>4}", design.name(), c.te, c.ba, c.sts, c.sf, c.se, c.ats);

        let n = THREADS as u64;
        assert_eq!(c.sf, n);
        match design {
            Design::Ns => assert_eq!((c.sts, c.ats), (2 * n, 3 * n)),
            Design::Ss => assert_eq!((c.sts, c.ats), (2, 3 * n)),
            Design::Fs => assert_eq!((c.sts, c.ats, c.se), (2, 3, 1)),
        }
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
