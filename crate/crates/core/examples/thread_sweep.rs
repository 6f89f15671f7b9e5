//! The benchmark sweep the `mttab` binary runs, driven through the library:
//! every design at several thread counts on a generated cycle graph.

use mttab::cli;

pub fn run_example() {
    let args = [
        "mttab",
        "--bench",
        "pathright:cycle:40",
        "--design",
        "ns,ss,fs",
        "--lock",
        "trylock",
        "--threads",
        "1,2,4",
        "--repeat",
        "2",
        "--check",
    ];
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(args, &mut out, &mut err);
    let out = String::from_utf8(out).unwrap();
    print!("{out}");
    assert_eq!(code, cli::EXIT_OK, "{}", String::from_utf8_lossy(&err));
    assert_eq!(out.lines().count(), 1 + 9);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
