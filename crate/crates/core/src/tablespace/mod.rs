//! The table space: one table entry per tabled predicate, subgoal tries,
//! subgoal frames and answer tries, organized according to one of three
//! sharing designs.
//!
//! | design | subgoal trie        | leaf points to               | answer trie |
//! |--------|---------------------|------------------------------|-------------|
//! | NS     | per thread          | subgoal frame                | per thread  |
//! | SS     | shared              | bucket array of frames       | per thread  |
//! | FS     | shared              | subgoal entry (bucket array) | shared      |
//!
//! Subgoal frames are always private to the thread that owns them.

mod bucket;
mod counters;

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::program::Pred;
use crate::term::{canonicalize_tuple, decode_tuple, encode_tuple, Term};
use crate::trie::{SyncMode, Trie, TrieNode};

pub use bucket::{bucket_cell, BucketArray, BucketCell, DIRECT_CELLS, INDIRECT_CELLS, MAX_THREADS};
use counters::AtomicCounters;
pub use counters::MemoryCounters;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("thread id {thread} exceeds bucket array capacity {capacity}")]
    ThreadCapacity { thread: usize, capacity: usize },
    #[error("{design} design shares tries between threads and needs lock or trylock")]
    UnsynchronizedSharing { design: Design },
    #[error("predicate is not tabled")]
    NotTabled,
    #[error("new answer on a completed subgoal frame")]
    CompleteFrame,
    #[error("subgoal frame completed twice")]
    DoubleCompletion,
    #[error("answers requested from a subgoal frame that is still evaluating")]
    NotComplete,
    #[error("stored answer could not be decoded: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    /// No-Sharing: every thread has private tables.
    Ns,
    /// Subgoal-Sharing: the subgoal trie is shared.
    Ss,
    /// Full-Sharing: subgoal trie, subgoal entries and answer tries are shared.
    Fs,
}

impl Design {
    pub const ALL: [Design; 3] = [Design::Ns, Design::Ss, Design::Fs];

    pub fn name(self) -> &'static str {
        match self {
            Design::Ns => "ns",
            Design::Ss => "ss",
            Design::Fs => "fs",
        }
    }

    /// Whether any trie is mutated by more than one thread.
    pub fn shares_tries(self) -> bool {
        !matches!(self, Design::Ns)
    }
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name().to_uppercase())
    }
}

impl std::str::FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ns" => Ok(Design::Ns),
            "ss" => Ok(Design::Ss),
            "fs" => Ok(Design::Fs),
            other => Err(format!("unknown design `{other}` (expected ns|ss|fs)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameState {
    Evaluating,
    Complete,
}

const EVALUATING: u8 = 0;
const COMPLETE: u8 = 1;

/// Shared per-subgoal record of the FS design.
pub struct SubgoalEntry {
    answers: Trie<()>,
    frames: BucketArray<SubgoalFrame>,
}

impl SubgoalEntry {
    pub fn answer_trie(&self) -> &Trie<()> {
        &self.answers
    }
}

enum FrameStorage {
    Private(Trie<()>),
    // Back pointer to the common subgoal entry.
    Shared(Arc<SubgoalEntry>),
}

#[derive(Default)]
struct FrameLocal {
    dfn: Option<usize>,
    // Leaf addresses of the answers this thread knows, in discovery order.
    order: Vec<usize>,
    // FS only: which shared leaves this thread has derived or absorbed.
    seen: HashSet<usize>,
}

/// Per-thread control record for one subgoal call.
pub struct SubgoalFrame {
    owner: usize,
    width: usize,
    state: AtomicU8,
    storage: FrameStorage,
    local: Mutex<FrameLocal>,
}

impl SubgoalFrame {
    fn new(owner: usize, width: usize, storage: FrameStorage) -> Self {
        SubgoalFrame {
            owner,
            width,
            state: AtomicU8::new(EVALUATING),
            storage,
            local: Mutex::new(FrameLocal::default()),
        }
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    /// Number of terms in each answer tuple (distinct variables of the call).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn state(&self) -> FrameState {
        match self.state.load(Ordering::Acquire) {
            COMPLETE => FrameState::Complete,
            _ => FrameState::Evaluating,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.state() == FrameState::Complete
    }

    pub fn dfn(&self) -> Option<usize> {
        self.local.lock().dfn
    }

    pub fn set_dfn(&self, dfn: usize) {
        self.local.lock().dfn = Some(dfn);
    }

    /// The answer trie this frame stores into (private or shared).
    pub fn answer_trie(&self) -> &Trie<()> {
        match &self.storage {
            FrameStorage::Private(trie) => trie,
            FrameStorage::Shared(entry) => &entry.answers,
        }
    }

    pub fn subgoal_entry(&self) -> Option<&SubgoalEntry> {
        match &self.storage {
            FrameStorage::Shared(entry) => Some(entry),
            FrameStorage::Private(_) => None,
        }
    }

    /// Answers known to the owning thread so far.
    pub fn known_answers(&self) -> usize {
        self.local.lock().order.len()
    }

    /// The `i`-th answer known to the owning thread, in discovery order.
    pub fn known_answer(&self, i: usize) -> Option<Result<Vec<Term>, TableError>> {
        let addr = *self.local.lock().order.get(i)?;
        // SAFETY: `order` only holds leaves of `self.answer_trie()`, whose
        // nodes live at least as long as `self`.
        let leaf = unsafe { &*(addr as *const TrieNode<()>) };
        Some(self.decode(leaf))
    }

    fn decode(&self, leaf: &TrieNode<()>) -> Result<Vec<Term>, TableError> {
        decode_tuple(&leaf.path(), self.width).map_err(|e| TableError::Corrupt(e.to_string()))
    }
}

enum LeafSlot {
    Frame(SubgoalFrame),
    Bucket(BucketArray<SubgoalFrame>),
    Entry(Arc<SubgoalEntry>),
}

enum EntryRoot {
    PerThread(BucketArray<Trie<LeafSlot>>),
    Shared(Trie<LeafSlot>),
}

/// Table entry of one tabled predicate.
pub struct TableEntry {
    pred: Pred,
    root: EntryRoot,
}

impl TableEntry {
    pub fn pred(&self) -> Pred {
        self.pred
    }
}

pub struct TableSpace {
    design: Design,
    sync: SyncMode,
    entries: HashMap<Pred, TableEntry>,
    counters: AtomicCounters,
    released: AtomicCounters,
}

impl TableSpace {
    /// Creates one table entry per tabled predicate. `sync` applies to the
    /// shared tries of SS and FS; NS ignores it.
    pub fn new(tabled: impl IntoIterator<Item = Pred>, design: Design, sync: SyncMode) -> Result<Self, TableError> {
        if design.shares_tries() && sync == SyncMode::None {
            return Err(TableError::UnsynchronizedSharing { design });
        }
        let counters = AtomicCounters::default();
        let mut entries = HashMap::new();
        for pred in tabled {
            let root = match design {
                Design::Ns => {
                    AtomicCounters::bump(&counters.ba, 1);
                    EntryRoot::PerThread(BucketArray::new())
                }
                Design::Ss | Design::Fs => EntryRoot::Shared(Trie::new()),
            };
            if entries.insert(pred, TableEntry { pred, root }).is_none() {
                AtomicCounters::bump(&counters.te, 1);
            }
        }
        Ok(TableSpace { design, sync, entries, counters, released: AtomicCounters::default() })
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn sync(&self) -> SyncMode {
        self.sync
    }

    pub fn table_entry(&self, pred: Pred) -> Option<&TableEntry> {
        self.entries.get(&pred)
    }

    fn shared_mode(&self) -> SyncMode {
        match self.design {
            Design::Ns => SyncMode::None,
            Design::Ss | Design::Fs => self.sync,
        }
    }

    /// Finds or creates the calling thread's subgoal frame for the canonical
    /// subgoal `call`. Returns the frame and whether it was created.
    pub fn tabled_subgoal_call(&self, call: &Term, thread: usize) -> Result<(&SubgoalFrame, bool), TableError> {
        let (name, arity) = call.functor().ok_or(TableError::NotTabled)?;
        let te = self.entries.get(&Pred { name, arity }).ok_or(TableError::NotTabled)?;
        let toks = encode_tuple(call.args());
        let mut vars = HashSet::new();
        call.for_each_var(&mut |v| {
            vars.insert(v);
        });
        let width = vars.len();

        let (root, mode) = match &te.root {
            EntryRoot::PerThread(ba) => {
                let (trie, _) = ba.get_or_insert_with(thread, &self.counters.ba, Trie::new)?;
                (trie, SyncMode::None)
            }
            EntryRoot::Shared(trie) => (trie, self.sync),
        };
        let path = root.check_insert_path(&toks, mode);
        AtomicCounters::bump(&self.counters.sts, path.created as u64);
        let leaf = path.leaf;

        let mut fresh_slot = false;
        let (frame, created) = match self.design {
            Design::Ns => {
                let slot = leaf.payload_or_insert_with(mode, || {
                    fresh_slot = true;
                    LeafSlot::Frame(SubgoalFrame::new(thread, width, FrameStorage::Private(Trie::new())))
                });
                let LeafSlot::Frame(frame) = slot else { unreachable!("NS leaves hold frames") };
                (frame, fresh_slot)
            }
            Design::Ss => {
                let slot = leaf.payload_or_insert_with(mode, || {
                    fresh_slot = true;
                    LeafSlot::Bucket(BucketArray::new())
                });
                if fresh_slot {
                    AtomicCounters::bump(&self.counters.ba, 1);
                }
                let LeafSlot::Bucket(ba) = slot else { unreachable!("SS leaves hold bucket arrays") };
                ba.get_or_insert_with(thread, &self.counters.ba, || {
                    SubgoalFrame::new(thread, width, FrameStorage::Private(Trie::new()))
                })?
            }
            Design::Fs => {
                let slot = leaf.payload_or_insert_with(mode, || {
                    fresh_slot = true;
                    LeafSlot::Entry(Arc::new(SubgoalEntry { answers: Trie::new(), frames: BucketArray::new() }))
                });
                if fresh_slot {
                    AtomicCounters::bump(&self.counters.se, 1);
                    AtomicCounters::bump(&self.counters.ba, 1);
                }
                let LeafSlot::Entry(entry) = slot else { unreachable!("FS leaves hold subgoal entries") };
                entry.frames.get_or_insert_with(thread, &self.counters.ba, || {
                    SubgoalFrame::new(thread, width, FrameStorage::Shared(Arc::clone(entry)))
                })?
            }
        };
        if created {
            AtomicCounters::bump(&self.counters.sf, 1);
        }
        Ok((frame, created))
    }

    /// Stores `answer` (the bindings of the call's variables) for the frame's
    /// owner and reports whether it is new *for that thread*. The result feeds
    /// fixpoint detection only; callers keep backtracking either way.
    pub fn new_answer(&self, frame: &SubgoalFrame, answer: &[Term]) -> Result<bool, TableError> {
        if frame.is_complete() {
            return Err(TableError::CompleteFrame);
        }
        let toks = if answer.iter().all(Term::is_ground) {
            encode_tuple(answer)
        } else {
            encode_tuple(&canonicalize_tuple(answer))
        };
        match &frame.storage {
            FrameStorage::Private(trie) => {
                let ins = trie.check_insert_path(&toks, SyncMode::None);
                AtomicCounters::bump(&self.counters.ats, ins.created as u64);
                if ins.newly_terminal {
                    frame.local.lock().order.push(ins.leaf as *const _ as usize);
                }
                Ok(ins.newly_terminal)
            }
            FrameStorage::Shared(entry) => {
                let ins = entry.answers.check_insert_path(&toks, self.shared_mode());
                AtomicCounters::bump(&self.counters.ats, ins.created as u64);
                let addr = ins.leaf as *const _ as usize;
                let mut local = frame.local.lock();
                let new = local.seen.insert(addr);
                if new {
                    local.order.push(addr);
                }
                Ok(new)
            }
        }
    }

    /// FS: copies into the frame's ledger every answer other threads have
    /// already stored for the same subgoal. Returns how many were absorbed.
    /// A no-op for private answer tries.
    pub fn absorb_shared_answers(&self, frame: &SubgoalFrame) -> usize {
        let FrameStorage::Shared(entry) = &frame.storage else { return 0 };
        let leaves = entry.answers.terminals();
        let mut local = frame.local.lock();
        let mut absorbed = 0;
        for leaf in leaves {
            let addr = leaf as *const _ as usize;
            if local.seen.insert(addr) {
                local.order.push(addr);
                absorbed += 1;
            }
        }
        absorbed
    }

    pub fn mark_complete<'a>(&self, frames: impl IntoIterator<Item = &'a SubgoalFrame>) -> Result<(), TableError> {
        for frame in frames {
            frame
                .state
                .compare_exchange(EVALUATING, COMPLETE, Ordering::AcqRel, Ordering::Acquire)
                .map_err(|_| TableError::DoubleCompletion)?;
        }
        Ok(())
    }

    /// Enumerates the answer trie of a completed frame. Under FS this is the
    /// shared trie, which may hold answers other threads derived for the same
    /// subgoal.
    pub fn answers_of(&self, frame: &SubgoalFrame) -> Result<Vec<Vec<Term>>, TableError> {
        if !frame.is_complete() {
            return Err(TableError::NotComplete);
        }
        frame.answer_trie().terminals().into_iter().map(|leaf| frame.decode(leaf)).collect()
    }

    pub fn snapshot_counters(&self) -> MemoryCounters {
        self.counters.snapshot()
    }

    /// Structures logically removed by [`TableSpace::release_thread`].
    pub fn released_counters(&self) -> MemoryCounters {
        self.released.snapshot()
    }

    /// Tallies the private structures of a finished thread as removed. Nothing
    /// is physically freed before the table space is dropped.
    pub fn release_thread(&self, thread: usize) -> MemoryCounters {
        let mut gone = MemoryCounters::default();
        let mut private_frame = |frame: &SubgoalFrame| {
            if frame.owner == thread {
                gone.sf += 1;
                if let FrameStorage::Private(trie) = &frame.storage {
                    gone.ats += trie.node_count() as u64;
                }
            }
        };
        for te in self.entries.values() {
            match &te.root {
                EntryRoot::PerThread(ba) => {
                    if let Some(trie) = ba.get(thread) {
                        gone.sts += trie.node_count() as u64;
                        trie.for_each_payload(|slot| {
                            if let LeafSlot::Frame(f) = slot {
                                private_frame(f)
                            }
                        });
                    }
                }
                EntryRoot::Shared(trie) => trie.for_each_payload(|slot| match slot {
                    LeafSlot::Bucket(ba) => ba.get(thread).into_iter().for_each(&mut private_frame),
                    LeafSlot::Entry(e) => e.frames.get(thread).into_iter().for_each(&mut private_frame),
                    LeafSlot::Frame(f) => private_frame(f),
                }),
            }
        }
        let r = &self.released;
        AtomicCounters::bump(&r.sts, gone.sts);
        AtomicCounters::bump(&r.sf, gone.sf);
        AtomicCounters::bump(&r.ats, gone.ats);
        gone
    }
}
