//! The two-level per-thread bucket array: 32 direct cells, then 32 lazily
//! allocated second-level arrays of 32 cells.

use std::sync::atomic::{AtomicU64, Ordering};

use mttab::tablespace::{bucket_cell, BucketArray, DIRECT_CELLS, INDIRECT_CELLS, MAX_THREADS};

pub fn run_example() {
    for t in [0, 31, 32, 63, 64, 1023] {
        println!("thread {t:>4} -> {:?}", bucket_cell(t, DIRECT_CELLS, INDIRECT_CELLS).unwrap());
    }
    assert!(bucket_cell(DIRECT_CELLS + INDIRECT_CELLS * INDIRECT_CELLS, DIRECT_CELLS, INDIRECT_CELLS).is_err());

    let levels = AtomicU64::new(0);
    let cells: BucketArray<String> = BucketArray::new();
    for t in [3, 40, 41, 100, MAX_THREADS - 1] {
        let (v, created) = cells.get_or_insert_with(t, &levels, || format!("frame of thread {t}")).unwrap();
        assert!(created);
        println!("{v}");
    }
    // 40 and 41 share a second-level array; 100 and 1023 need one each.
    assert_eq!(levels.load(Ordering::Relaxed), 3);
    assert_eq!(cells.iter().count(), 5);
    assert!(cells.get(4).is_none());
}

#[allow(dead_code)]
fn main() {
    run_example();
}
