//! Edge configurations and the left/right recursive `path/2` benchmarks.

use std::fmt;
use std::str::FromStr;

use crate::program::{Literal, Pred, Program};
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("{kind} depth {depth} exceeds the desk-scale cap of {cap}; pass --paper-scale to run it")]
    TooDeep { kind: EdgeKind, depth: u32, cap: u32 },
    #[error("bad benchmark spec `{0}` (expected pathleft|pathright:btree|pyramid|cycle|grid:DEPTH)")]
    BadSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    BTree,
    Pyramid,
    Cycle,
    Grid,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 4] = [EdgeKind::BTree, EdgeKind::Pyramid, EdgeKind::Cycle, EdgeKind::Grid];

    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::BTree => "btree",
            EdgeKind::Pyramid => "pyramid",
            EdgeKind::Cycle => "cycle",
            EdgeKind::Grid => "grid",
        }
    }

    /// Default depth for quick runs.
    pub fn desk_depth(self) -> u32 {
        match self {
            EdgeKind::BTree => 10,
            EdgeKind::Pyramid | EdgeKind::Cycle => 100,
            EdgeKind::Grid => 8,
        }
    }

    /// Largest depth accepted without the override.
    pub fn desk_cap(self) -> u32 {
        match self {
            EdgeKind::BTree => 12,
            EdgeKind::Pyramid => 400,
            EdgeKind::Cycle => 200,
            EdgeKind::Grid => 12,
        }
    }

    /// Depths of the original 24-core experiments.
    pub fn full_depth(self) -> u32 {
        match self {
            EdgeKind::BTree => 18,
            EdgeKind::Pyramid | EdgeKind::Cycle => 2000,
            EdgeKind::Grid => 35,
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeConfig {
    pub kind: EdgeKind,
    pub depth: u32,
}

impl EdgeConfig {
    pub fn new(kind: EdgeKind, depth: u32) -> Self {
        EdgeConfig { kind, depth }
    }

    pub fn desk(kind: EdgeKind) -> Self {
        EdgeConfig { kind, depth: kind.desk_depth() }
    }
}

/// Generates the `edge/2` facts of `config`. Depths above the desk cap are
/// refused unless `allow_large` is set.
pub fn gen_edges(config: EdgeConfig, allow_large: bool) -> Result<Vec<(i64, i64)>, BenchError> {
    let EdgeConfig { kind, depth } = config;
    if depth == 0 {
        return Err(BenchError::ZeroDepth);
    }
    if !allow_large && depth > kind.desk_cap() {
        return Err(BenchError::TooDeep { kind, depth, cap: kind.desk_cap() });
    }
    let d = i64::from(depth);
    let mut edges = Vec::new();
    match kind {
        // Complete binary tree on 1..2^d-1: i -> 2i, 2i+1.
        EdgeKind::BTree => {
            let last = (1i64 << depth) - 1;
            for i in 1..=last {
                for child in [2 * i, 2 * i + 1] {
                    if child <= last {
                        edges.push((i, child));
                    }
                }
            }
        }
        // Apex 1 above two sides of `d` levels each: left side 2i, right
        // side 2i+1. Each side runs downwards and every level has a rung
        // from its left node to its right node.
        EdgeKind::Pyramid => {
            edges.push((1, 2));
            edges.push((1, 3));
            for i in 1..=d {
                let (left, right) = (2 * i, 2 * i + 1);
                edges.push((left, right));
                if i < d {
                    edges.push((left, left + 2));
                    edges.push((right, right + 2));
                }
            }
        }
        EdgeKind::Cycle => {
            for i in 1..d {
                edges.push((i, i + 1));
            }
            edges.push((d, 1));
        }
        // d x d lattice, (r,c) -> (r-1)*d + c, both directions between
        // orthogonal neighbours.
        EdgeKind::Grid => {
            let id = |r: i64, c: i64| (r - 1) * d + c;
            for r in 1..=d {
                for c in 1..=d {
                    if c < d {
                        edges.push((id(r, c), id(r, c + 1)));
                        edges.push((id(r, c + 1), id(r, c)));
                    }
                    if r < d {
                        edges.push((id(r, c), id(r + 1, c)));
                        edges.push((id(r + 1, c), id(r, c)));
                    }
                }
            }
        }
    }
    Ok(edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Recursion {
    Left,
    Right,
}

impl Recursion {
    pub fn name(self) -> &'static str {
        match self {
            Recursion::Left => "pathleft",
            Recursion::Right => "pathright",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BenchInstance {
    pub recursion: Recursion,
    pub config: EdgeConfig,
}

impl BenchInstance {
    pub fn new(recursion: Recursion, kind: EdgeKind, depth: u32) -> Self {
        BenchInstance { recursion, config: EdgeConfig::new(kind, depth) }
    }

    /// The eight desk-scale instances.
    pub fn desk_suite() -> Vec<BenchInstance> {
        [Recursion::Left, Recursion::Right]
            .into_iter()
            .flat_map(|r| EdgeKind::ALL.map(|k| BenchInstance::new(r, k, k.desk_depth())))
            .collect()
    }

    pub fn name(&self) -> String {
        format!("{}:{}:{}", self.recursion.name(), self.config.kind, self.config.depth)
    }
}

impl FromStr for BenchInstance {
    type Err = BenchError;

    /// `pathleft|pathright : btree|pyramid|cycle|grid : DEPTH|desk|full`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BenchError::BadSpec(s.to_owned());
        let mut parts = s.split(':');
        let (Some(rec), Some(kind), Some(depth), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let recursion = match rec {
            "pathleft" => Recursion::Left,
            "pathright" => Recursion::Right,
            _ => return Err(bad()),
        };
        let kind = EdgeKind::ALL.into_iter().find(|k| k.name() == kind).ok_or_else(bad)?;
        let depth = match depth {
            "desk" => kind.desk_depth(),
            "full" => kind.full_depth(),
            n => n.parse().map_err(|_| bad())?,
        };
        Ok(BenchInstance::new(recursion, kind, depth))
    }
}

/// The two-clause `path/2` program (tabled) plus the generated edges.
pub fn make_program(bench: &BenchInstance, allow_large: bool) -> Result<Program, BenchError> {
    let edges = gen_edges(bench.config, allow_large)?;
    let mut p = Program::new();
    let path = p.intern("path");
    let edge = p.intern("edge");
    p.declare_tabled(Pred { name: path, arity: 2 });
    let (x, y, z) = (Term::Var(0), Term::Var(1), Term::Var(2));
    let recursive_body = match bench.recursion {
        Recursion::Left => vec![Literal::new(path, vec![x.clone(), y.clone()]), Literal::new(edge, vec![y, z.clone()])],
        Recursion::Right => {
            vec![Literal::new(edge, vec![x.clone(), y.clone()]), Literal::new(path, vec![y, z.clone()])]
        }
    };
    let head = Literal::new(path, vec![x.clone(), z.clone()]);
    p.add_rule(head.clone(), recursive_body).expect("path rules are range-restricted");
    p.add_rule(head, vec![Literal::new(edge, vec![x, z])]).expect("path rules are range-restricted");
    for (a, b) in edges {
        p.add_fact(Literal::new(edge, vec![Term::Int(a), Term::Int(b)])).expect("edges are ground");
    }
    Ok(p)
}

/// `path(X,Y)` in `program`'s symbol table.
pub fn path_query(program: &mut Program) -> Term {
    let path = program.intern("path");
    Term::compound(path, vec![Term::Var(0), Term::Var(1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn small_configurations() {
        assert_eq!(gen_edges(EdgeConfig::new(EdgeKind::Cycle, 3), false).unwrap(), vec![(1, 2), (2, 3), (3, 1)]);
        assert_eq!(gen_edges(EdgeConfig::new(EdgeKind::BTree, 2), false).unwrap(), vec![(1, 2), (1, 3)]);
        assert_eq!(gen_edges(EdgeConfig::new(EdgeKind::Pyramid, 1), false).unwrap(), vec![(1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn grid_two_enumerated() {
        // 2x2 lattice: adjacencies 1-2, 3-4, 1-3, 2-4, each both ways.
        let mut want = BTreeSet::new();
        for (a, b) in [(1, 2), (3, 4), (1, 3), (2, 4)] {
            want.insert((a, b));
            want.insert((b, a));
        }
        let got: BTreeSet<_> = gen_edges(EdgeConfig::new(EdgeKind::Grid, 2), false).unwrap().into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn node_ids_are_positive_and_edges_distinct() {
        for kind in EdgeKind::ALL {
            for depth in 1..6 {
                let edges = gen_edges(EdgeConfig::new(kind, depth), false).unwrap();
                assert!(edges.iter().all(|&(a, b)| a > 0 && b > 0));
                let distinct: BTreeSet<_> = edges.iter().collect();
                assert_eq!(distinct.len(), edges.len(), "{kind} {depth}");
            }
        }
    }

    #[test]
    fn desk_cap_needs_override() {
        let deep = EdgeConfig::new(EdgeKind::Cycle, 2000);
        assert!(matches!(gen_edges(deep, false), Err(BenchError::TooDeep { .. })));
        assert_eq!(gen_edges(deep, true).unwrap().len(), 2000);
        assert_eq!(gen_edges(EdgeConfig::new(EdgeKind::Grid, 0), true), Err(BenchError::ZeroDepth));
    }

    #[test]
    fn spec_parsing() {
        let b: BenchInstance = "pathleft:cycle:100".parse().unwrap();
        assert_eq!(b, BenchInstance::new(Recursion::Left, EdgeKind::Cycle, 100));
        assert_eq!(b.name(), "pathleft:cycle:100");
        let p: BenchInstance = "pathright:btree:full".parse().unwrap();
        assert_eq!(p.config.depth, 18);
        for bad in ["pathleft:cycle", "path:cycle:3", "pathleft:ring:3", "pathleft:cycle:x", "a:b:c:d"] {
            assert!(bad.parse::<BenchInstance>().is_err(), "{bad}");
        }
        assert_eq!(BenchInstance::desk_suite().len(), 8);
    }

    #[test]
    fn program_shape() {
        let p = make_program(&BenchInstance::new(Recursion::Right, EdgeKind::Cycle, 3), false).unwrap();
        assert_eq!(p.rules().len(), 2);
        assert_eq!(p.fact_count(), 3);
        assert_eq!(p.tabled().count(), 1);
        assert!(p.to_text().contains("path(V0,V1) :- edge(V0,V2), path(V2,V1)."));
    }
}
