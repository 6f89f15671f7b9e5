macro_rules! example {
    ($name:ident, $file:literal) => {
        #[path = $file]
        mod $name;

        #[test]
        fn $name() {
            $name::run_example();
        }
    };
}

example!(variant_tries, "../examples/variant_tries.rs");
example!(concurrent_trie, "../examples/concurrent_trie.rs");
example!(bucket_cells, "../examples/bucket_cells.rs");
example!(table_designs, "../examples/table_designs.rs");
example!(transitive_closure, "../examples/transitive_closure.rs");
example!(thread_sweep, "../examples/thread_sweep.rs");
example!(memory_laws, "../examples/memory_laws.rs");
