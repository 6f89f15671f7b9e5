use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Allocation tallies per structure kind.
///
/// Counts, not bytes: each kind has a fixed size, so the per-design memory
/// laws hold on these counts directly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryCounters {
    /// Table entries.
    pub te: u64,
    /// Bucket arrays, first- and second-level.
    pub ba: u64,
    /// Subgoal trie nodes.
    pub sts: u64,
    /// Subgoal frames.
    pub sf: u64,
    /// Subgoal entries.
    pub se: u64,
    /// Answer trie nodes.
    pub ats: u64,
}

impl MemoryCounters {
    pub fn total(&self) -> u64 {
        self.te + self.ba + self.sts + self.sf + self.se + self.ats
    }
}

impl std::ops::Add for MemoryCounters {
    type Output = MemoryCounters;

    fn add(self, o: MemoryCounters) -> MemoryCounters {
        MemoryCounters {
            te: self.te + o.te,
            ba: self.ba + o.ba,
            sts: self.sts + o.sts,
            sf: self.sf + o.sf,
            se: self.se + o.se,
            ats: self.ats + o.ats,
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct AtomicCounters {
    pub te: AtomicU64,
    pub ba: AtomicU64,
    pub sts: AtomicU64,
    pub sf: AtomicU64,
    pub se: AtomicU64,
    pub ats: AtomicU64,
}

impl AtomicCounters {
    pub fn bump(counter: &AtomicU64, by: u64) {
        if by > 0 {
            counter.fetch_add(by, Ordering::Relaxed);
        }
    }

    pub fn snapshot(&self) -> MemoryCounters {
        MemoryCounters {
            te: self.te.load(Ordering::Relaxed),
            ba: self.ba.load(Ordering::Relaxed),
            sts: self.sts.load(Ordering::Relaxed),
            sf: self.sf.load(Ordering::Relaxed),
            se: self.se.load(Ordering::Relaxed),
            ats: self.ats.load(Ordering::Relaxed),
        }
    }
}
