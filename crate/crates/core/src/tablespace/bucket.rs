//! Two-level thread-indexed bucket arrays.
//!
//! Threads `0..s` own a direct cell each. Higher thread ids are mapped into
//! one of `u` indirect cells, each of which lazily points to a second-level
//! array of `u` cells.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use super::TableError;

/// Direct cells per bucket array.
pub const DIRECT_CELLS: usize = 32;
/// Indirect cells, and the size of each second-level array.
pub const INDIRECT_CELLS: usize = 32;
/// Largest thread count an engine run accepts.
pub const MAX_THREADS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BucketCell {
    Direct(usize),
    Indirect(usize, usize),
}

/// Maps thread `t` to its cell for a bucket array with `s` direct cells and
/// `u` indirect cells of `u` slots each.
pub fn bucket_cell(t: usize, s: usize, u: usize) -> Result<BucketCell, TableError> {
    if t < s {
        return Ok(BucketCell::Direct(t));
    }
    let capacity = s + u * u;
    if t >= capacity {
        return Err(TableError::ThreadCapacity { thread: t, capacity });
    }
    Ok(BucketCell::Indirect((t - s) / u, (t - s) % u))
}

type Cells<T> = Box<[OnceLock<T>]>;

pub struct BucketArray<T> {
    direct: Cells<T>,
    indirect: Cells<Cells<T>>,
}

impl<T> Default for BucketArray<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> BucketArray<T> {
    pub fn new() -> Self {
        BucketArray {
            direct: (0..DIRECT_CELLS).map(|_| OnceLock::new()).collect(),
            indirect: (0..INDIRECT_CELLS).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn capacity(&self) -> usize {
        DIRECT_CELLS + INDIRECT_CELLS * INDIRECT_CELLS
    }

    pub fn get(&self, thread: usize) -> Option<&T> {
        match bucket_cell(thread, DIRECT_CELLS, INDIRECT_CELLS).ok()? {
            BucketCell::Direct(i) => self.direct[i].get(),
            BucketCell::Indirect(first, second) => self.indirect[first].get()?[second].get(),
        }
    }

    /// Returns the cell of `thread`, creating its value with `create` if the
    /// cell is empty. A missing second-level array is allocated (and
    /// `level_allocs` incremented) at most once per indirect cell.
    pub fn get_or_insert_with(
        &self,
        thread: usize,
        level_allocs: &AtomicU64,
        create: impl FnOnce() -> T,
    ) -> Result<(&T, bool), TableError> {
        let cell = match bucket_cell(thread, DIRECT_CELLS, INDIRECT_CELLS)? {
            BucketCell::Direct(i) => &self.direct[i],
            BucketCell::Indirect(first, second) => {
                let level = self.indirect[first].get_or_init(|| {
                    level_allocs.fetch_add(1, Ordering::Relaxed);
                    (0..INDIRECT_CELLS).map(|_| OnceLock::new()).collect()
                });
                &level[second]
            }
        };
        let mut created = false;
        let value = cell.get_or_init(|| {
            created = true;
            create()
        });
        Ok((value, created))
    }

    /// Occupied cells as `(thread, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> {
        let direct = self.direct.iter().enumerate().filter_map(|(t, c)| c.get().map(|v| (t, v)));
        let indirect = self.indirect.iter().enumerate().flat_map(|(first, level)| {
            level.get().into_iter().flat_map(move |cells| {
                cells
                    .iter()
                    .enumerate()
                    .filter_map(move |(second, c)| c.get().map(|v| (DIRECT_CELLS + first * INDIRECT_CELLS + second, v)))
            })
        });
        direct.chain(indirect)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn cell_examples() {
        assert_eq!(bucket_cell(5, 32, 32).unwrap(), BucketCell::Direct(5));
        assert_eq!(bucket_cell(32, 32, 32).unwrap(), BucketCell::Indirect(0, 0));
        assert_eq!(bucket_cell(100, 32, 32).unwrap(), BucketCell::Indirect(2, 4));
        assert!(matches!(bucket_cell(1056, 32, 32), Err(TableError::ThreadCapacity { thread: 1056, capacity: 1056 })));
    }

    const _: () = assert!(DIRECT_CELLS + INDIRECT_CELLS * INDIRECT_CELLS >= MAX_THREADS);

    #[test]
    fn second_level_allocated_once() {
        let ba: BucketArray<usize> = BucketArray::new();
        let allocs = AtomicU64::new(0);
        std::thread::scope(|s| {
            for t in 32..64 {
                let ba = &ba;
                let allocs = &allocs;
                s.spawn(move || {
                    ba.get_or_insert_with(t, allocs, || t).unwrap();
                });
            }
        });
        assert_eq!(allocs.load(Ordering::Relaxed), 1);
        let (v, created) = ba.get_or_insert_with(40, &allocs, || 0).unwrap();
        assert_eq!((*v, created), (40, false));
        let seen: HashSet<usize> = ba
            .iter()
            .map(|(t, v)| {
                assert_eq!(t, *v);
                t
            })
            .collect();
        assert_eq!(seen, (32..64).collect());
    }

    #[test]
    fn direct_cells_need_no_second_level() {
        let ba: BucketArray<u8> = BucketArray::new();
        let allocs = AtomicU64::new(0);
        ba.get_or_insert_with(31, &allocs, || 1).unwrap();
        assert_eq!(allocs.load(Ordering::Relaxed), 0);
        assert_eq!(ba.get(31), Some(&1));
        assert_eq!(ba.get(30), None);
        assert_eq!(ba.get(500), None);
    }

    proptest! {
        #[test]
        fn injective_for_small_geometries(s in 1usize..40, u in 1usize..12) {
            let mut seen = HashSet::new();
            for t in 0..s + u * u {
                prop_assert!(seen.insert(bucket_cell(t, s, u).unwrap()));
            }
            prop_assert!(bucket_cell(s + u * u, s, u).is_err());
        }
    }
}
