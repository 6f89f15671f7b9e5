//! Sibling-chained tries with a lock field in every node.
//!
//! The children of a node form a singly linked chain starting at
//! `first_child`. New children are always linked at the head of the chain and
//! a node's `sibling` link is fixed before the node is published, so a reader
//! that loads `first_child` sees a chain that only ever grows at the front.
//! That is what lets readers traverse without locks while writers insert.
//!
//! Writers synchronize on the lock of the *parent* node (one writer per
//! sibling chain). [`SyncMode::TryLock`] never blocks: a thread that fails to
//! take the lock goes back and scans only the nodes inserted since its last
//! pass.
//!
//! Nodes are never unlinked. They are freed when the owning [`Trie`] is
//! dropped.

use std::ptr;
use std::sync::atomic::{AtomicBool, AtomicPtr, AtomicUsize, Ordering};
use std::sync::OnceLock;

use parking_lot::Mutex;

use crate::term::{Token, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyncMode {
    /// No synchronization; legal only while a single thread mutates the trie.
    None,
    /// Blocking lock on the parent node.
    Lock,
    /// Non-blocking lock attempts interleaved with rescans of new siblings.
    TryLock,
}

impl SyncMode {
    pub fn name(self) -> &'static str {
        match self {
            SyncMode::None => "none",
            SyncMode::Lock => "lock",
            SyncMode::TryLock => "trylock",
        }
    }
}

impl std::str::FromStr for SyncMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(SyncMode::None),
            "lock" => Ok(SyncMode::Lock),
            "trylock" => Ok(SyncMode::TryLock),
            other => Err(format!("unknown lock mode `{other}` (expected none|lock|trylock)")),
        }
    }
}

pub struct TrieNode<P> {
    token: Token,
    parent: *const TrieNode<P>,
    first_child: AtomicPtr<TrieNode<P>>,
    // Written once, before the node becomes reachable.
    sibling: *mut TrieNode<P>,
    lock: Mutex<()>,
    terminal: AtomicBool,
    payload: OnceLock<P>,
}

// SAFETY: the raw links point to nodes owned by the same `Trie`, which are
// never freed while a shared reference to the trie exists. All mutation after
// publication goes through atomics, the lock, or `OnceLock`.
unsafe impl<P: Send> Send for TrieNode<P> {}
unsafe impl<P: Send + Sync> Sync for TrieNode<P> {}

impl<P> TrieNode<P> {
    fn alloc(token: Token, parent: *const TrieNode<P>, sibling: *mut TrieNode<P>) -> *mut Self {
        Box::into_raw(Box::new(TrieNode {
            token,
            parent,
            first_child: AtomicPtr::new(ptr::null_mut()),
            sibling,
            lock: Mutex::new(()),
            terminal: AtomicBool::new(false),
            payload: OnceLock::new(),
        }))
    }

    pub fn token(&self) -> Token {
        self.token
    }

    pub fn parent(&self) -> Option<&TrieNode<P>> {
        // SAFETY: parents outlive their children; see module docs.
        unsafe { self.parent.as_ref() }
    }

    pub fn first_child(&self) -> Option<&TrieNode<P>> {
        // SAFETY: published with Release in `link_child`.
        unsafe { self.first_child.load(Ordering::Acquire).as_ref() }
    }

    pub fn sibling(&self) -> Option<&TrieNode<P>> {
        // SAFETY: immutable after publication.
        unsafe { self.sibling.as_ref() }
    }

    pub fn children(&self) -> Children<'_, P> {
        Children { next: self.first_child() }
    }

    pub fn is_root(&self) -> bool {
        self.parent.is_null()
    }

    /// Tokens on the path from the root down to this node.
    pub fn path(&self) -> TokenSeq {
        let mut toks = Vec::new();
        let mut node = self;
        while let Some(parent) = node.parent() {
            toks.push(node.token);
            node = parent;
        }
        toks.reverse();
        toks
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.load(Ordering::Acquire)
    }

    /// Marks the node as the end of an inserted path. Returns `true` if this
    /// call set the flag.
    pub fn mark_terminal(&self) -> bool {
        !self.terminal.swap(true, Ordering::AcqRel)
    }

    pub fn payload(&self) -> Option<&P> {
        self.payload.get()
    }

    /// Get-or-create of the leaf attachment. Under a synchronized mode the
    /// creation runs while holding this node's lock field; `create` runs at
    /// most once per node either way.
    pub fn payload_or_insert_with(&self, mode: SyncMode, create: impl FnOnce() -> P) -> &P {
        if let Some(p) = self.payload.get() {
            return p;
        }
        match mode {
            SyncMode::None => self.payload.get_or_init(create),
            SyncMode::Lock | SyncMode::TryLock => {
                let _guard = self.lock.lock();
                self.payload.get_or_init(create)
            }
        }
    }

    fn as_ptr(&self) -> *mut TrieNode<P> {
        self as *const _ as *mut _
    }
}

pub struct Children<'a, P> {
    next: Option<&'a TrieNode<P>>,
}

impl<'a, P> Iterator for Children<'a, P> {
    type Item = &'a TrieNode<P>;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.next?;
        self.next = node.sibling();
        Some(node)
    }
}

/// A trie owning all of its nodes. `P` is the leaf attachment type.
pub struct Trie<P> {
    root: Box<TrieNode<P>>,
    nodes: AtomicUsize,
}

impl<P> Default for Trie<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> Trie<P> {
    pub fn new() -> Self {
        // SAFETY: freshly allocated by `alloc`.
        let root = unsafe { Box::from_raw(TrieNode::alloc(Token::Int(0), ptr::null(), ptr::null_mut())) };
        Trie { root, nodes: AtomicUsize::new(0) }
    }

    pub fn root(&self) -> &TrieNode<P> {
        &self.root
    }

    /// Number of nodes allocated below the root.
    pub fn node_count(&self) -> usize {
        self.nodes.load(Ordering::Relaxed)
    }

    /// Returns the unique child of `parent` carrying `token`, creating it if
    /// absent, and whether this call created it.
    ///
    /// `parent` must be a node of this trie.
    pub fn check_insert_node<'a>(
        &'a self,
        parent: &'a TrieNode<P>,
        token: Token,
        mode: SyncMode,
    ) -> (&'a TrieNode<P>, bool) {
        match mode {
            SyncMode::None => {
                let first = parent.first_child.load(Ordering::Acquire);
                if let Some(found) = scan(first, ptr::null_mut(), token) {
                    return (found, false);
                }
                (self.link_child(parent, token), true)
            }
            SyncMode::Lock => {
                let first = parent.first_child.load(Ordering::Acquire);
                if let Some(found) = scan(first, ptr::null_mut(), token) {
                    return (found, false);
                }
                let _guard = parent.lock.lock();
                let head = parent.first_child.load(Ordering::Acquire);
                if let Some(found) = scan(head, first, token) {
                    return (found, false);
                }
                (self.link_child(parent, token), true)
            }
            SyncMode::TryLock => self.check_insert_trylock(parent, token),
        }
    }

    fn check_insert_trylock<'a>(&'a self, parent: &'a TrieNode<P>, token: Token) -> (&'a TrieNode<P>, bool) {
        let mut last_child: *mut TrieNode<P> = ptr::null_mut();
        let _guard = loop {
            let first_child = parent.first_child.load(Ordering::Acquire);
            if let Some(found) = scan(first_child, last_child, token) {
                return (found, false);
            }
            last_child = first_child;
            if let Some(guard) = parent.lock.try_lock() {
                break guard;
            }
            std::hint::spin_loop();
        };
        let head = parent.first_child.load(Ordering::Acquire);
        if let Some(found) = scan(head, last_child, token) {
            return (found, false);
        }
        (self.link_child(parent, token), true)
    }

    // Caller holds the parent's lock, or is the sole mutator.
    fn link_child<'a>(&'a self, parent: &'a TrieNode<P>, token: Token) -> &'a TrieNode<P> {
        let head = parent.first_child.load(Ordering::Acquire);
        let child = TrieNode::alloc(token, parent.as_ptr(), head);
        parent.first_child.store(child, Ordering::Release);
        self.nodes.fetch_add(1, Ordering::Relaxed);
        // SAFETY: just allocated; owned by this trie from now on.
        unsafe { &*child }
    }

    /// Folds [`Trie::check_insert_node`] over `toks` starting at the root and
    /// marks the final node terminal. Returns the leaf, the number of nodes
    /// this call created, and whether the leaf was newly marked terminal.
    pub fn check_insert_path(&self, toks: &[Token], mode: SyncMode) -> PathInsert<'_, P> {
        let mut node = self.root();
        let mut created = 0;
        for &tok in toks {
            let (child, new) = self.check_insert_node(node, tok, mode);
            created += usize::from(new);
            node = child;
        }
        let newly_terminal = node.mark_terminal();
        PathInsert { leaf: node, created, newly_terminal }
    }

    /// Looks up `toks` without inserting.
    pub fn find_path(&self, toks: &[Token]) -> Option<&TrieNode<P>> {
        let mut node = self.root();
        for &tok in toks {
            node = node.children().find(|c| c.token == tok)?;
        }
        Some(node)
    }

    /// All terminal nodes, in depth-first order.
    pub fn terminals(&self) -> Vec<&TrieNode<P>> {
        let mut out = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(node) = stack.pop() {
            if node.is_terminal() {
                out.push(node);
            }
            stack.extend(node.children());
        }
        out
    }

    /// One token sequence per completed path.
    pub fn enumerate(&self) -> Vec<TokenSeq> {
        self.terminals().into_iter().map(TrieNode::path).collect()
    }

    /// Visits every node that carries a payload.
    pub fn for_each_payload(&self, mut f: impl FnMut(&P)) {
        let mut stack = vec![self.root()];
        while let Some(node) = stack.pop() {
            if let Some(p) = node.payload() {
                f(p);
            }
            stack.extend(node.children());
        }
    }
}

pub struct PathInsert<'a, P> {
    pub leaf: &'a TrieNode<P>,
    pub created: usize,
    pub newly_terminal: bool,
}

/// Walks the chain from `from` up to (excluding) `until` looking for `token`.
fn scan<'a, P>(from: *mut TrieNode<P>, until: *mut TrieNode<P>, token: Token) -> Option<&'a TrieNode<P>> {
    let mut child = from;
    while child != until {
        // SAFETY: every pointer in a chain was published by `link_child` and
        // stays valid for the trie's lifetime; `until` is always an older
        // node of the same chain, or null.
        let node = unsafe { &*child };
        if node.token == token {
            return Some(node);
        }
        child = node.sibling;
    }
    None
}

impl<P> Drop for Trie<P> {
    fn drop(&mut self) {
        // Iterative to survive long sibling chains and deep paths.
        let mut pending = vec![*self.root.first_child.get_mut()];
        while let Some(mut ptr) = pending.pop() {
            while !ptr.is_null() {
                // SAFETY: each non-root node is reachable exactly once and
                // was allocated with `Box::into_raw`.
                let mut node = unsafe { Box::from_raw(ptr) };
                pending.push(*node.first_child.get_mut());
                ptr = node.sibling;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Sym;
    use std::collections::{BTreeSet, HashMap, HashSet};
    use std::sync::{Arc, Barrier};
    use std::time::Duration;

    const SYNCED: [SyncMode; 2] = [SyncMode::Lock, SyncMode::TryLock];

    #[test]
    fn first_insert_becomes_first_child() {
        let trie: Trie<()> = Trie::new();
        let a = Token::Atom(Sym(0));
        let (node, created) = trie.check_insert_node(trie.root(), a, SyncMode::None);
        assert!(created);
        assert!(ptr::eq(trie.root().first_child().unwrap(), node));
        assert_eq!(node.token(), a);
    }

    #[test]
    fn repeated_insert_is_idempotent() {
        for mode in [SyncMode::None, SyncMode::Lock, SyncMode::TryLock] {
            let trie: Trie<()> = Trie::new();
            let a = Token::Atom(Sym(0));
            let (first, _) = trie.check_insert_node(trie.root(), a, mode);
            let (second, created) = trie.check_insert_node(trie.root(), a, mode);
            assert!(!created);
            assert!(ptr::eq(first, second));
            assert_eq!(trie.root().children().count(), 1);
        }
    }

    #[test]
    fn shared_prefixes_are_stored_once() {
        let p = Sym(0);
        let trie: Trie<()> = Trie::new();
        let first = trie.check_insert_path(&[Token::Functor(p, 2), Token::Int(1), Token::Int(2)], SyncMode::None);
        assert_eq!(first.created, 3);
        assert_eq!(first.leaf.path().len(), 3);
        let second = trie.check_insert_path(&[Token::Functor(p, 2), Token::Int(1), Token::Int(3)], SyncMode::None);
        assert_eq!(second.created, 1);
        assert_eq!(second.leaf.path().len(), 3);
        let again = trie.check_insert_path(&[Token::Functor(p, 2), Token::Int(1), Token::Int(2)], SyncMode::None);
        assert_eq!(again.created, 0);
        assert!(!again.newly_terminal);
        assert!(ptr::eq(again.leaf, first.leaf));
        assert_eq!(trie.node_count(), 4);
        assert_eq!(trie.enumerate().len(), 2);
    }

    #[test]
    fn empty_trie_enumerates_nothing() {
        let trie: Trie<()> = Trie::new();
        assert!(trie.enumerate().is_empty());
        assert_eq!(trie.node_count(), 0);
    }

    #[test]
    fn new_children_are_linked_at_the_head() {
        let trie: Trie<()> = Trie::new();
        for i in 0..5 {
            trie.check_insert_node(trie.root(), Token::Int(i), SyncMode::None);
        }
        let order: Vec<_> = trie.root().children().map(|c| c.token()).collect();
        assert_eq!(order, (0..5).rev().map(Token::Int).collect::<Vec<_>>());
    }

    #[test]
    fn payload_created_once() {
        let trie: Trie<u32> = Trie::new();
        let leaf = trie.check_insert_path(&[Token::Int(1)], SyncMode::Lock).leaf;
        let mut calls = 0;
        assert_eq!(
            *leaf.payload_or_insert_with(SyncMode::Lock, || {
                calls += 1;
                7
            }),
            7
        );
        assert_eq!(
            *leaf.payload_or_insert_with(SyncMode::Lock, || {
                calls += 1;
                8
            }),
            7
        );
        assert_eq!(calls, 1);
    }

    /// `threads` workers insert the same `tokens` under the root; returns the
    /// trie and, per worker, the node address returned for each token.
    fn hammer(
        threads: usize,
        tokens: &[Token],
        mode: SyncMode,
        shuffle_seed: u64,
    ) -> (Trie<()>, Vec<Vec<(Token, usize)>>) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;

        let trie: Trie<()> = Trie::new();
        let barrier = Barrier::new(threads);
        let returned = std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let trie = &trie;
                    let barrier = &barrier;
                    let mut mine = tokens.to_vec();
                    let mut rng = rand::rngs::StdRng::seed_from_u64(shuffle_seed ^ t as u64);
                    mine.shuffle(&mut rng);
                    s.spawn(move || {
                        barrier.wait();
                        mine.iter()
                            .map(|&tok| {
                                let (node, _) = trie.check_insert_node(trie.root(), tok, mode);
                                (tok, node as *const _ as usize)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        (trie, returned)
    }

    #[test]
    fn sixteen_threads_same_tokens_give_one_child_each() {
        let tokens: Vec<Token> = (0..64).map(Token::Int).collect();
        let oracle: BTreeSet<Token> = tokens.iter().copied().collect();
        for mode in SYNCED {
            let (trie, _) = hammer(16, &tokens, mode, 1);
            let children: Vec<Token> = trie.root().children().map(|c| c.token()).collect();
            assert_eq!(children.len(), 64, "{mode:?}");
            assert_eq!(children.iter().copied().collect::<BTreeSet<_>>(), oracle);
            assert_eq!(trie.node_count(), 64);

            // Enumeration after the stress run: single-token paths were never
            // marked terminal, so mark them and compare against the oracle.
            for child in trie.root().children() {
                child.mark_terminal();
            }
            let seqs: BTreeSet<TokenSeq> = trie.enumerate().into_iter().collect();
            assert_eq!(seqs, oracle.iter().map(|t| vec![*t]).collect());
        }
    }

    #[test]
    fn concurrent_callers_agree_on_node_identity() {
        let tokens: Vec<Token> = (0..200).map(|i| Token::Int(i % 50)).collect();
        for threads in [2, 8, 16, 24] {
            for mode in SYNCED {
                let (trie, returned) = hammer(threads, &tokens, mode, threads as u64);
                let chain: HashMap<Token, usize> =
                    trie.root().children().map(|c| (c.token(), c as *const _ as usize)).collect();
                assert_eq!(chain.len(), 50);
                assert_eq!(trie.root().children().count(), 50);
                for per_thread in &returned {
                    for (tok, addr) in per_thread {
                        assert_eq!(chain[tok], *addr, "{threads} threads, {mode:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn concurrent_paths_conserve_node_count() {
        // Oracle: count distinct prefixes of the inserted paths.
        let paths: Vec<Vec<Token>> =
            (0..120).map(|i| vec![Token::Int(i % 3), Token::Int(i % 7), Token::Int(i % 11)]).collect();
        let mut prefixes = HashSet::new();
        for p in &paths {
            for k in 1..=p.len() {
                prefixes.insert(p[..k].to_vec());
            }
        }
        for mode in SYNCED {
            let trie: Trie<()> = Trie::new();
            std::thread::scope(|s| {
                for t in 0..8 {
                    let trie = &trie;
                    let paths = &paths;
                    s.spawn(move || {
                        for p in paths.iter().cycle().skip(t * 13).take(paths.len()) {
                            trie.check_insert_path(p, mode);
                        }
                    });
                }
            });
            assert_eq!(trie.node_count(), prefixes.len());
            let got: HashSet<TokenSeq> = trie.enumerate().into_iter().collect();
            let want: HashSet<TokenSeq> = paths.iter().cloned().collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn trylock_terminates_under_contention() {
        let tokens: Vec<Token> = (0..500).map(|i| Token::Int(i % 100)).collect();
        let (tx, rx) = std::sync::mpsc::channel();
        let done = Arc::new(AtomicBool::new(false));
        let flag = done.clone();
        std::thread::spawn(move || {
            let (trie, _) = hammer(24, &tokens, SyncMode::TryLock, 99);
            flag.store(true, Ordering::SeqCst);
            tx.send(trie.node_count()).unwrap();
        });
        let count = rx
            .recv_timeout(Duration::from_secs(60))
            .expect("trylock workers did not finish within the watchdog window");
        assert!(done.load(Ordering::SeqCst));
        assert_eq!(count, 100);
    }
}
