//! Many threads inserting overlapping tokens under one parent node, with the
//! lock-based and the trylock-based check/insert.

use std::collections::HashSet;
use std::time::Instant;

use mttab::term::Token;
use mttab::trie::{SyncMode, Trie};

const THREADS: usize = 8;
const OPS: usize = 5_000;
const ALPHABET: i64 = 500;

pub fn run_example() {
    for mode in [SyncMode::Lock, SyncMode::TryLock] {
        let trie: Trie<()> = Trie::new();
        let start = Instant::now();
        let returned: Vec<Vec<(Token, usize)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..THREADS)
                .map(|t| {
                    let trie = &trie;
                    s.spawn(move || {
                        (0..OPS)
                            .map(|i| {
                                let tok = Token::Int(((i * 7919 + t * 104_729) as i64) % ALPHABET);
                                let (node, _) = trie.check_insert_node(trie.root(), tok, mode);
                                (tok, node as *const _ as usize)
                            })
                            .collect()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let elapsed = start.elapsed();

        let children: Vec<_> = trie.root().children().collect();
        let distinct: HashSet<Token> = children.iter().map(|c| c.token()).collect();
        assert_eq!(distinct.len(), children.len(), "duplicate child under {mode:?}");
        for (tok, addr) in returned.iter().flatten() {
            let node = children.iter().find(|c| c.token() == *tok).unwrap();
            assert_eq!(*node as *const _ as usize, *addr);
        }
        println!("{:>8}: {} children after {} calls in {elapsed:?}", mode.name(), children.len(), THREADS * OPS);
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
