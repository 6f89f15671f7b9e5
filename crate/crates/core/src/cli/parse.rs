//! Text format for programs:
//!
//! ```text
//! % comment
//! :- table path/2.
//! path(X,Z) :- edge(X,Y), path(Y,Z).
//! path(X,Z) :- edge(X,Z).
//! edge(1,2).
//! ```
//!
//! Names start lowercase, variables uppercase or `_`, integers are signed
//! decimals.

use std::collections::HashMap;

use crate::program::{Literal, Pred, Program, ProgramError};
use crate::term::{SymbolTable, Term, VarId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: {source}")]
    Program { line: usize, col: usize, source: ProgramError },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    Slash,
    Neck,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("`{n}`"),
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, col: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line, col, message: message.into() }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c == '%' {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                } else if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '/' => Tok::Slash,
                ':' if self.chars.peek() == Some(&'-') => {
                    self.bump();
                    Tok::Neck
                }
                '-' | '0'..='9' => {
                    let mut s = String::from(c);
                    while let Some(&d) = self.chars.peek().filter(|d| d.is_ascii_digit()) {
                        s.push(d);
                        self.bump();
                    }
                    Tok::Int(s.parse().map_err(|_| self.error(line, col, format!("bad integer `{s}`")))?)
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut s = String::from(c);
                    while let Some(&d) = self.chars.peek().filter(|d| d.is_alphanumeric() || **d == '_') {
                        s.push(d);
                        self.bump();
                    }
                    if c.is_lowercase() {
                        Tok::Name(s)
                    } else {
                        Tok::Var(s)
                    }
                }
                other => return Err(self.error(line, col, format!("unexpected character `{other}`"))),
            };
            out.push((tok, line, col));
        }
    }
}

struct Parser<'s> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    symbols: &'s mut SymbolTable,
    vars: HashMap<String, VarId>,
    next_var: VarId,
}

impl<'s> Parser<'s> {
    fn new(text: &str, symbols: &'s mut SymbolTable) -> Result<Self, ParseError> {
        Ok(Parser { toks: Lexer::new(text).tokens()?, pos: 0, symbols, vars: HashMap::new(), next_var: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, line, col) = self.toks[self.pos];
        (line, col)
    }

    fn next(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax { line, col, message: format!("expected {wanted}, found {}", self.peek().describe()) }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.next();
                Ok(Term::Int(i))
            }
            Tok::Var(name) => {
                self.next();
                let id = if name == "_" {
                    self.fresh_var()
                } else if let Some(&id) = self.vars.get(&name) {
                    id
                } else {
                    let id = self.fresh_var();
                    self.vars.insert(name, id);
                    id
                };
                Ok(Term::Var(id))
            }
            Tok::Name(name) => {
                self.next();
                let functor = self.symbols.intern(&name);
                if *self.peek() != Tok::LParen {
                    return Ok(Term::Atom(functor));
                }
                self.next();
                let mut args = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.next();
                    args.push(self.term()?);
                }
                self.expect(Tok::RParen, "`,` or `)`")?;
                Ok(Term::compound(functor, args))
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn fresh_var(&mut self) -> VarId {
        self.next_var += 1;
        self.next_var - 1
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let (line, col) = self.here();
        if !matches!(self.peek(), Tok::Name(_)) {
            return Err(self.unexpected("a predicate name"));
        }
        let t = self.term()?;
        Literal::from_term(&t).map_err(|source| ParseError::Program { line, col, source })
    }

    fn table_directive(&mut self, program: &mut Program) -> Result<(), ParseError> {
        match self.next() {
            Tok::Name(n) if n == "table" => {}
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("`table`"));
            }
        }
        loop {
            let name = match self.peek().clone() {
                Tok::Name(n) => {
                    self.next();
                    n
                }
                _ => return Err(self.unexpected("a predicate name")),
            };
            self.expect(Tok::Slash, "`/`")?;
            let arity = match self.peek().clone() {
                Tok::Int(a) if a >= 0 => {
                    self.next();
                    a as u32
                }
                _ => return Err(self.unexpected("an arity")),
            };
            let name = self.symbols.intern(&name);
            program.declare_tabled(Pred { name, arity });
            if *self.peek() == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::Dot, "`.`")
    }

    fn clause(&mut self, program: &mut Program) -> Result<(), ParseError> {
        self.vars.clear();
        self.next_var = 0;
        let (line, col) = self.here();
        let head = self.literal()?;
        let mut body = Vec::new();
        if *self.peek() == Tok::Neck {
            self.next();
            body.push(self.literal()?);
            while *self.peek() == Tok::Comma {
                self.next();
                body.push(self.literal()?);
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        let added = if body.is_empty() { program.add_fact(head) } else { program.add_rule(head, body) };
        added.map_err(|source| ParseError::Program { line, col, source })
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut program = Program::new();
    let mut symbols = std::mem::take(&mut program.symbols);
    {
        let mut p = Parser::new(text, &mut symbols)?;
        while *p.peek() != Tok::Eof {
            if *p.peek() == Tok::Neck {
                p.next();
                p.table_directive(&mut program)?;
            } else {
                p.clause(&mut program)?;
            }
        }
    }
    program.symbols = symbols;
    Ok(program)
}

/// Parses a single goal such as `path(X,Y)` (optionally ending in `.`),
/// interning names into `symbols`.
pub fn parse_goal(text: &str, symbols: &mut SymbolTable) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, symbols)?;
    let goal = p.literal()?;
    if *p.peek() == Tok::Dot {
        p.next();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of goal"));
    }
    Ok(goal.to_term())
}
