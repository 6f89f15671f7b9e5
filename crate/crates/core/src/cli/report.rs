use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::engine::AnswerSet;
use crate::tablespace::MemoryCounters;

/// Column order of the CSV report.
pub const CSV_COLUMNS: [&str; 12] =
    ["bench", "design", "lock", "threads", "time_ms", "answers", "te", "ba", "sts", "sf", "se", "ats"];

/// One configuration's result. CSV carries the [`CSV_COLUMNS`]; JSON also
/// carries the answer-set hash shared by all threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub bench: String,
    pub design: String,
    pub lock: String,
    pub threads: usize,
    pub time_ms: f64,
    pub answers: usize,
    #[serde(flatten)]
    pub counters: MemoryCounters,
    pub answer_hash: String,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    bench: &'a str,
    design: &'a str,
    lock: &'a str,
    threads: usize,
    time_ms: String,
    answers: usize,
    te: u64,
    ba: u64,
    sts: u64,
    sf: u64,
    se: u64,
    ats: u64,
}

impl RunReport {
    pub fn write_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> std::io::Result<()> {
        let c = &self.counters;
        w.serialize(CsvRow {
            bench: &self.bench,
            design: &self.design,
            lock: &self.lock,
            threads: self.threads,
            time_ms: format!("{:.3}", self.time_ms),
            answers: self.answers,
            te: c.te,
            ba: c.ba,
            sts: c.sts,
            sf: c.sf,
            se: c.se,
            ats: c.ats,
        })
        .map_err(std::io::Error::other)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Order-independent fingerprint of an answer set (sets iterate sorted).
pub fn answer_set_hash(answers: &AnswerSet) -> u64 {
    let mut h = DefaultHasher::new();
    answers.hash(&mut h);
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Term;

    #[test]
    fn csv_header_matches_columns() {
        let report = RunReport {
            bench: "b".into(),
            design: "fs".into(),
            lock: "trylock".into(),
            threads: 2,
            time_ms: 1.5,
            answers: 9,
            counters: MemoryCounters { te: 1, ba: 3, sts: 2, sf: 2, se: 1, ats: 12 },
            answer_hash: "0".into(),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        report.write_csv(&mut w).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "b,fs,trylock,2,1.500,9,1,3,2,2,1,12");

        let back: RunReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn hash_ignores_insertion_order() {
        let a: AnswerSet = [vec![Term::Int(1)], vec![Term::Int(2)]].into_iter().collect();
        let b: AnswerSet = [vec![Term::Int(2)], vec![Term::Int(1)]].into_iter().collect();
        assert_eq!(answer_set_hash(&a), answer_set_hash(&b));
    }
}
