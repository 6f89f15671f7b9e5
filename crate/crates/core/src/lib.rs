//! Multi-threaded tabled evaluation of Datalog programs.
//!
//! Each worker thread evaluates the query independently with local
//! scheduling. Threads differ only in how much of the table space they
//! share: nothing (`Design::Ns`), subgoal tries (`Design::Ss`), or subgoal
//! and answer tries (`Design::Fs`).

pub mod bench;
pub mod cli;
pub mod engine;
pub mod oracle;
pub mod program;
pub mod tablespace;
pub mod term;
pub mod trie;
