//! Variant canonicalization, token encoding and trie sharing of prefixes.

use mttab::term::{canonicalize_variant, decode_term, encode_term, is_variant, SymbolTable, Term};
use mttab::trie::{SyncMode, Trie};

pub fn run_example() {
    let mut symbols = SymbolTable::new();
    let path = symbols.intern("path");

    // path(X, 7, X) and path(Y, 7, Y) are variants; path(X, 7, Y) is not.
    let a = Term::compound(path, vec![Term::Var(4), Term::Int(7), Term::Var(4)]);
    let b = Term::compound(path, vec![Term::Var(9), Term::Int(7), Term::Var(9)]);
    let c = Term::compound(path, vec![Term::Var(4), Term::Int(7), Term::Var(5)]);
    assert!(is_variant(&a, &b));
    assert!(!is_variant(&a, &c));

    let canon = canonicalize_variant(&a);
    println!("canonical form: {}", canon.display(&symbols));
    let toks = encode_term(&canon);
    println!("tokens: {toks:?}");
    assert_eq!(decode_term(&toks).unwrap(), canon);

    let trie: Trie<()> = Trie::new();
    for t in [&a, &b, &c] {
        let ins = trie.check_insert_path(&encode_term(&canonicalize_variant(t)), SyncMode::None);
        println!(
            "{:<14} created {} nodes, new path: {}",
            t.display(&symbols).to_string(),
            ins.created,
            ins.newly_terminal
        );
    }
    // a and b share one path; c diverges only at its last token.
    assert_eq!(trie.enumerate().len(), 2);
    assert_eq!(trie.node_count(), toks.len() + 1);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
