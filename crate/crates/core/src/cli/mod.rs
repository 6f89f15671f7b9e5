//! Command-line front end: load a program or generate a benchmark, sweep
//! designs × lock modes × thread counts, and report one row per run.
//!
//! Exit codes: 0 ok, 1 usage or configuration error, 2 parse error,
//! 3 verification failure.

mod parse;
mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::bench::{self, BenchInstance};
use crate::engine::{solve_parallel, AnswerSet, EngineError, EvalConfig};
use crate::oracle::oracle_solve;
use crate::program::{Program, ProgramError};
use crate::tablespace::{Design, TableError, MAX_THREADS};
use crate::trie::SyncMode;

pub use parse::{parse_goal, parse_program, ParseError};
pub use report::{answer_set_hash, RunReport, CSV_COLUMNS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "mttab", about = "Multi-threaded tabled Datalog evaluation and table-space benchmarks")]
pub struct Args {
    /// Program file to load.
    #[arg(long, conflicts_with = "bench", required_unless_present = "bench")]
    pub program: Option<PathBuf>,
    /// Generated benchmark: pathleft|pathright:btree|pyramid|cycle|grid:DEPTH
    /// (DEPTH may also be `desk` or `full`).
    #[arg(long)]
    pub bench: Option<String>,
    /// Query goal; defaults to `path(X,Y)` for benchmarks.
    #[arg(long)]
    pub query: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "ns,ss,fs")]
    pub design: Vec<Design>,
    /// Synchronization of shared tries.
    #[arg(long, value_delimiter = ',', default_value = "trylock")]
    pub lock: Vec<SyncMode>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub threads: Vec<usize>,
    /// Runs per configuration; the reported time is their mean.
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
    /// Verify every thread's answers against the bottom-up oracle.
    #[arg(long)]
    pub check: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub output: OutputFormat,
    /// Allow the full-size benchmark depths.
    #[arg(long)]
    pub paper_scale: bool,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Verify(String),
    #[error("evaluation failed: {0}")]
    Engine(EngineError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => EXIT_USAGE,
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Verify(_) => EXIT_VERIFY,
            Failure::Engine(e) => match e {
                EngineError::Threads(_)
                | EngineError::Program(ProgramError::UntabledRecursion(_))
                | EngineError::Table(TableError::UnsynchronizedSharing { .. }) => EXIT_USAGE,
                _ => EXIT_VERIFY,
            },
        }
    }
}

/// Entry point of the binary. Returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match run_args(&args, out) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(err, "error: {failure}");
            failure.code()
        }
    }
}

struct Workload {
    name: String,
    program: Program,
    query: crate::term::Term,
}

fn load(args: &Args) -> Result<Workload, Failure> {
    let (name, mut program) = if let Some(path) = &args.program {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        (name, parse_program(&text)?)
    } else {
        let spec = args.bench.as_deref().expect("clap enforces --program or --bench");
        let instance: BenchInstance = spec.parse().map_err(|e: bench::BenchError| Failure::Usage(e.to_string()))?;
        let program = bench::make_program(&instance, args.paper_scale).map_err(|e| Failure::Usage(e.to_string()))?;
        (instance.name(), program)
    };
    let query = match (&args.query, &args.program) {
        (Some(text), _) => parse_goal(text, &mut program.symbols)?,
        (None, None) => bench::path_query(&mut program),
        (None, Some(_)) => return Err(Failure::Usage("--query is required with --program".into())),
    };
    Ok(Workload { name, program, query })
}

fn configurations(args: &Args) -> Result<Vec<(Design, SyncMode, usize)>, Failure> {
    if args.repeat == 0 {
        return Err(Failure::Usage("--repeat must be at least 1".into()));
    }
    let mut out = Vec::new();
    for &design in &args.design {
        for &lock in &args.lock {
            if design.shares_tries() && lock == SyncMode::None {
                return Err(Failure::Usage(format!(
                    "configuration error: design {} shares tries and cannot run with --lock none",
                    design.name()
                )));
            }
            for &threads in &args.threads {
                if threads == 0 || threads > MAX_THREADS {
                    return Err(Failure::Usage(format!(
                        "configuration error: thread count {threads} outside 1..={MAX_THREADS}"
                    )));
                }
                out.push((design, lock, threads));
            }
        }
    }
    Ok(out)
}

fn run_args(args: &Args, out: &mut dyn Write) -> Result<(), Failure> {
    let configs = configurations(args)?;
    let work = load(args)?;
    let oracle: Option<AnswerSet> = if args.check {
        Some(oracle_solve(&work.program, &work.query).map_err(|e| Failure::Usage(e.to_string()))?)
    } else {
        None
    };

    let mut csv = match args.output {
        OutputFormat::Csv => Some(csv::Writer::from_writer(Vec::new())),
        OutputFormat::Json => None,
    };
    for (design, lock, threads) in configs {
        let cfg = EvalConfig::new(design, lock, threads);
        let mut total_ms = 0.0;
        let mut last = None;
        for _ in 0..args.repeat {
            let outcome = solve_parallel(&work.program, &work.query, cfg).map_err(Failure::Engine)?;
            total_ms += outcome.elapsed.as_secs_f64() * 1e3;
            last = Some(outcome);
        }
        let outcome = last.expect("repeat >= 1");
        let label = format!("{} {} {} threads={threads}", work.name, design.name(), lock.name());

        let hashes: Vec<u64> = outcome.answer_sets().map(answer_set_hash).collect();
        let first = &outcome.threads[0].answers;
        if let Some(t) = outcome.answer_sets().position(|a| a != first) {
            return Err(Failure::Verify(format!(
                "answer-set mismatch across threads ({label}): thread {t} differs from thread 0"
            )));
        }
        if let Some(expected) = &oracle {
            if first != expected {
                return Err(Failure::Verify(format!(
                    "oracle mismatch ({label}): engine found {} answers, oracle {}",
                    first.len(),
                    expected.len()
                )));
            }
        }

        let report = RunReport {
            bench: work.name.clone(),
            design: design.name().into(),
            lock: lock.name().into(),
            threads,
            time_ms: total_ms / args.repeat as f64,
            answers: first.len(),
            counters: outcome.counters,
            answer_hash: format!("{:016x}", hashes[0]),
        };
        match &mut csv {
            Some(w) => report.write_csv(w)?,
            None => writeln!(out, "{}", report.to_json())?,
        }
    }
    if let Some(w) = csv {
        let bytes = w.into_inner().map_err(|e| Failure::Io(e.into_error()))?;
        out.write_all(&bytes)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("mttab").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn fs_without_locking_is_a_configuration_error() {
        let (code, _, err) = run_capture(&["--bench", "pathleft:cycle:3", "--design", "fs", "--lock", "none"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("configuration error"), "{err}");
    }

    #[test]
    fn sweep_emits_cartesian_rows() {
        let (code, out, err) = run_capture(&[
            "--bench",
            "pathright:cycle:5",
            "--threads",
            "1,2,3",
            "--design",
            "ns,ss,fs",
            "--repeat",
            "1",
            "--check",
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 10);
        assert!(lines[1..].iter().all(|l| l.split(',').nth(5) == Some("25")));
    }

    #[test]
    fn usage_and_parse_errors() {
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--bench", "pathleft:ring:3"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--bench", "pathleft:cycle:3", "--threads", "0"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--bench", "pathleft:cycle:5000"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--bench", "pathleft:cycle:3", "--query", "path(X"]).0, EXIT_PARSE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }
}
