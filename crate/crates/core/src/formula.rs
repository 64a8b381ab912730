//! Propositional formulas: parsing, printing, evaluation and the syntactic
//! canonical form used to identify formulas inside the engine.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

/// A propositional formula.
///
/// The variant order is significant: the derived `Ord` ranks node kinds in
/// declaration order, then compares atom names and children recursively.
/// Canonical forms sort their operands with it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("empty formula")]
    Empty,
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("world assigns no value to atom `{0}`")]
    MissingAtom(String),
}

pub fn atom(name: &str) -> Formula {
    Formula::Atom(name.to_string())
}

pub fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

pub fn and(a: Formula, b: Formula) -> Formula {
    Formula::And(Box::new(a), Box::new(b))
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Formula::Or(Box::new(a), Box::new(b))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

pub fn is_valid_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A total truth assignment over some set of atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct World(BTreeMap<String, bool>);

impl World {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: bool) {
        self.0.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, bool)> for World {
    fn from_iter<I: IntoIterator<Item = (S, bool)>>(iter: I) -> Self {
        World(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl Formula {
    /// Classical two-valued evaluation. Fails if the world leaves an atom
    /// of the formula unassigned.
    pub fn evaluate(&self, world: &World) -> Result<bool, FormulaError> {
        self.evaluate_with(&|name| world.get(name))
    }

    pub fn evaluate_with<F>(&self, lookup: &F) -> Result<bool, FormulaError>
    where
        F: Fn(&str) -> Option<bool>,
    {
        Ok(match self {
            Formula::Atom(name) => {
                lookup(name).ok_or_else(|| FormulaError::MissingAtom(name.clone()))?
            }
            Formula::Not(f) => !f.evaluate_with(lookup)?,
            Formula::And(a, b) => a.evaluate_with(lookup)? && b.evaluate_with(lookup)?,
            Formula::Or(a, b) => a.evaluate_with(lookup)? || b.evaluate_with(lookup)?,
            Formula::Implies(a, b) => !a.evaluate_with(lookup)? || b.evaluate_with(lookup)?,
        })
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(name) => {
                out.insert(name.clone());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// All subformulas in pre-order, including `self`.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            out.push(f);
            match f {
                Formula::Atom(_) => {}
                Formula::Not(g) => stack.push(g),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
            }
        }
        out
    }

    /// Number of nested connectives; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Splits a conjunction into its conjuncts, flattening any association
    /// of nested `And` nodes. A non-conjunction yields itself.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Negation normal form with implications eliminated and same-kind
    /// operands flattened and sorted. Two formulas with the same key are
    /// logically equivalent; the converse holds only up to commutativity,
    /// associativity, De Morgan and double negation.
    pub fn canonical_key(&self) -> Formula {
        normalize(nnf(self, false))
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(_) | Formula::Atom(_) => 4,
        }
    }
}

fn nnf(f: &Formula, negated: bool) -> Formula {
    match (f, negated) {
        (Formula::Atom(_), false) => f.clone(),
        (Formula::Atom(_), true) => not(f.clone()),
        (Formula::Not(g), _) => nnf(g, !negated),
        (Formula::And(a, b), false) => and(nnf(a, false), nnf(b, false)),
        (Formula::And(a, b), true) => or(nnf(a, true), nnf(b, true)),
        (Formula::Or(a, b), false) => or(nnf(a, false), nnf(b, false)),
        (Formula::Or(a, b), true) => and(nnf(a, true), nnf(b, true)),
        (Formula::Implies(a, b), false) => or(nnf(a, true), nnf(b, false)),
        (Formula::Implies(a, b), true) => and(nnf(a, false), nnf(b, true)),
    }
}

// Input is in NNF, so only And/Or nodes need work.
fn normalize(f: Formula) -> Formula {
    match f {
        Formula::And(..) => rebuild(flatten(f, true), and),
        Formula::Or(..) => rebuild(flatten(f, false), or),
        other => other,
    }
}

fn flatten(f: Formula, conj: bool) -> Vec<Formula> {
    let mut operands = Vec::new();
    let mut stack = vec![f];
    while let Some(f) = stack.pop() {
        match f {
            Formula::And(a, b) if conj => {
                stack.push(*a);
                stack.push(*b);
            }
            Formula::Or(a, b) if !conj => {
                stack.push(*a);
                stack.push(*b);
            }
            other => operands.push(normalize(other)),
        }
    }
    operands.sort();
    operands
}

fn rebuild(mut operands: Vec<Formula>, op: fn(Formula, Formula) -> Formula) -> Formula {
    let mut acc = operands.pop().expect("binary node has operands");
    while let Some(next) = operands.pop() {
        acc = op(next, acc);
    }
    acc
}

/// All subformulas of `fs` plus the negation of each, deduplicated by
/// canonical key. Order is first occurrence.
pub fn subformula_closure(fs: &[Formula]) -> Vec<Formula> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for f in fs {
        for sub in f.subformulas() {
            for candidate in [sub.clone(), not(sub.clone())] {
                if seen.insert(candidate.canonical_key()) {
                    out.push(candidate);
                }
            }
        }
    }
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, node: &Formula, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({node})")
            } else {
                write!(f, "{node}")
            }
        }
        match self {
            Formula::Atom(name) => f.write_str(name),
            Formula::Not(g) => {
                f.write_str("!")?;
                child(f, g, g.precedence() < 4)
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let prec = self.precedence();
                let sym = if prec == 3 { " & " } else { " | " };
                child(f, a, a.precedence() < prec)?;
                f.write_str(sym)?;
                child(f, b, b.precedence() <= prec)
            }
            Formula::Implies(a, b) => {
                child(f, a, a.precedence() <= 1)?;
                f.write_str(" -> ")?;
                child(f, b, false)
            }
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(name) => write!(f, "`{name}`"),
            Token::Not => f.write_str("`!`"),
            Token::And => f.write_str("`&`"),
            Token::Or => f.write_str("`|`"),
            Token::Arrow => f.write_str("`->`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, FormulaError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let token = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '!' | '~' => Token::Not,
            '&' => Token::And,
            '|' => Token::Or,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '-' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, '>')) => Token::Arrow,
                    _ => {
                        return Err(FormulaError::Syntax {
                            position: pos,
                            message: "expected `->`".into(),
                        })
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push((pos, Token::Ident(name)));
                continue;
            }
            other => {
                return Err(FormulaError::Syntax {
                    position: pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        tokens.push((pos, token));
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Token::Arrow) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            lhs = or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            lhs = and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(not(self.unary()?))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.implies()?;
                if self.peek() != Some(&Token::RParen) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok(Formula::Atom(name))
            }
            Some(other) => self.error(format!("expected a formula, found {other}")),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses a formula. Precedence from tightest: `!` (or `~`), `&`, `|`,
/// `->`. Conjunction and disjunction associate left, implication right.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(FormulaError::Empty);
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let f = parser.implies()?;
    if let Some(tok) = parser.peek() {
        let tok = tok.clone();
        return parser.error(format!("unexpected {tok}"));
    }
    Ok(f)
}
