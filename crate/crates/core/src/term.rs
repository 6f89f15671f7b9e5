//! Terms, variant canonicalization and the linear token encoding stored in
//! tries.
//!
//! A term is encoded by a pre-order walk: a compound contributes a
//! [`Token::Functor`] followed by the encodings of its arguments, every other
//! term contributes a single token. The encoding is prefix-free, so a tuple of
//! terms can be stored as the concatenation of the individual encodings.

use std::collections::HashMap;
use std::fmt;

/// Interned symbol id. Two atoms are equal iff their ids are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(pub u32);

/// Variable id. After canonicalization ids are `0, 1, 2, ...` in order of first
/// occurrence.
pub type VarId = u32;

#[derive(Debug, Default, Clone)]
pub struct SymbolTable {
    names: Vec<String>,
    ids: HashMap<String, Sym>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> Sym {
        if let Some(&sym) = self.ids.get(name) {
            return sym;
        }
        let sym = Sym(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), sym);
        sym
    }

    pub fn lookup(&self, name: &str) -> Option<Sym> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, sym: Sym) -> &str {
        self.names.get(sym.0 as usize).map(String::as_str).unwrap_or("?")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Atom(Sym),
    Int(i64),
    Var(VarId),
    /// Functor applied to at least one argument.
    Compound(Sym, Vec<Term>),
}

impl Term {
    /// Builds `f(args...)`. An empty argument list yields the atom `f`, so a
    /// `Compound` always has arity ≥ 1.
    pub fn compound(functor: Sym, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(functor)
        } else {
            Term::Compound(functor, args)
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            Term::Atom(_) | Term::Int(_) => true,
        }
    }

    /// Functor name and arity; atoms have arity 0, numbers and variables have
    /// no functor.
    pub fn functor(&self) -> Option<(Sym, u32)> {
        match self {
            Term::Atom(s) => Some((*s, 0)),
            Term::Compound(s, args) => Some((*s, args.len() as u32)),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    /// Calls `f` on every variable occurrence in pre-order.
    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Term::Var(v) => f(*v),
            Term::Compound(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
            Term::Atom(_) | Term::Int(_) => {}
        }
    }

    pub fn display<'a>(&'a self, symbols: &'a SymbolTable) -> TermDisplay<'a> {
        TermDisplay { term: self, symbols }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    symbols: &'a SymbolTable,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Atom(s) => f.write_str(self.symbols.name(*s)),
            Term::Int(i) => write!(f, "{i}"),
            Term::Var(v) => write!(f, "V{v}"),
            Term::Compound(s, args) => {
                write!(f, "{}(", self.symbols.name(*s))?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", arg.display(self.symbols))?;
                }
                f.write_str(")")
            }
        }
    }
}

/// One symbol of the linear term encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    Atom(Sym),
    Int(i64),
    Var(VarId),
    Functor(Sym, u32),
}

pub type TokenSeq = Vec<Token>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("token sequence ended inside a term")]
    Truncated,
    #[error("{0} trailing tokens after the last term")]
    Trailing(usize),
    #[error("functor token with arity 0")]
    ZeroArity,
}

/// Renames variables so that `p(X,Y,X)` becomes `p(V0,V1,V0)`. Two terms are
/// variants iff their canonical forms are identical.
pub fn canonicalize_variant(t: &Term) -> Term {
    let mut renaming = VarRenaming::default();
    renaming.apply(t)
}

/// Canonicalizes a tuple of terms jointly, numbering variables across the
/// whole tuple.
pub fn canonicalize_tuple(ts: &[Term]) -> Vec<Term> {
    let mut renaming = VarRenaming::default();
    ts.iter().map(|t| renaming.apply(t)).collect()
}

#[derive(Default)]
struct VarRenaming {
    map: HashMap<VarId, VarId>,
}

impl VarRenaming {
    fn apply(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(v) => {
                let next = self.map.len() as VarId;
                Term::Var(*self.map.entry(*v).or_insert(next))
            }
            Term::Compound(f, args) => Term::Compound(*f, args.iter().map(|a| self.apply(a)).collect()),
            Term::Atom(_) | Term::Int(_) => t.clone(),
        }
    }
}

pub fn is_variant(a: &Term, b: &Term) -> bool {
    canonicalize_variant(a) == canonicalize_variant(b)
}

/// Pre-order linearization of `t`. Callers that key tables on variants should
/// canonicalize first.
pub fn encode_term(t: &Term) -> TokenSeq {
    let mut out = Vec::new();
    encode_into(t, &mut out);
    out
}

pub fn encode_into(t: &Term, out: &mut TokenSeq) {
    match t {
        Term::Atom(s) => out.push(Token::Atom(*s)),
        Term::Int(i) => out.push(Token::Int(*i)),
        Term::Var(v) => out.push(Token::Var(*v)),
        Term::Compound(f, args) => {
            out.push(Token::Functor(*f, args.len() as u32));
            for arg in args {
                encode_into(arg, out);
            }
        }
    }
}

pub fn encode_tuple(ts: &[Term]) -> TokenSeq {
    let mut out = Vec::with_capacity(ts.len());
    for t in ts {
        encode_into(t, &mut out);
    }
    out
}

/// Decodes exactly one term from `toks`.
pub fn decode_term(toks: &[Token]) -> Result<Term, DecodeError> {
    let (term, rest) = decode_prefix(toks)?;
    if rest.is_empty() {
        Ok(term)
    } else {
        Err(DecodeError::Trailing(rest.len()))
    }
}

/// Decodes exactly `width` consecutive terms from `toks`.
pub fn decode_tuple(mut toks: &[Token], width: usize) -> Result<Vec<Term>, DecodeError> {
    let mut out = Vec::with_capacity(width);
    for _ in 0..width {
        let (term, rest) = decode_prefix(toks)?;
        out.push(term);
        toks = rest;
    }
    if toks.is_empty() {
        Ok(out)
    } else {
        Err(DecodeError::Trailing(toks.len()))
    }
}

fn decode_prefix(toks: &[Token]) -> Result<(Term, &[Token]), DecodeError> {
    let (first, mut rest) = toks.split_first().ok_or(DecodeError::Truncated)?;
    let term = match *first {
        Token::Atom(s) => Term::Atom(s),
        Token::Int(i) => Term::Int(i),
        Token::Var(v) => Term::Var(v),
        Token::Functor(_, 0) => return Err(DecodeError::ZeroArity),
        Token::Functor(f, arity) => {
            let mut args = Vec::with_capacity(arity as usize);
            for _ in 0..arity {
                let (arg, r) = decode_prefix(rest)?;
                args.push(arg);
                rest = r;
            }
            Term::Compound(f, args)
        }
    };
    Ok((term, rest))
}
