//! Knowledge bases: ordered lists of `P(formula) in [lo, hi]` sentences.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::formula::{parse_formula, Formula, FormulaError};
use crate::interval::{parse_rational, IntervalError, ProbInterval};
use crate::rules::RuleId;

/// Where a sentence came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Line number (1-based) in a KB file.
    Given { line: usize },
    /// Conclusion of an inference rule.
    Derived { rule: RuleId },
    /// Built directly in code.
    Assumed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub formula: Formula,
    pub interval: ProbInterval,
    pub origin: Origin,
}

impl Sentence {
    pub fn new(formula: Formula, interval: ProbInterval) -> Self {
        Sentence {
            formula,
            interval,
            origin: Origin::Assumed,
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({}) in {}", self.formula, self.interval)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct KbError {
    pub line: usize,
    pub kind: KbErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    sentences: Vec<Sentence>,
    atoms: BTreeSet<String>,
}

impl KnowledgeBase {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        let mut atoms = BTreeSet::new();
        for s in &sentences {
            s.formula.collect_atoms(&mut atoms);
        }
        KnowledgeBase { sentences, atoms }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn atoms(&self) -> &BTreeSet<String> {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

impl std::str::FromStr for KnowledgeBase {
    type Err = KbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_kb(s)
    }
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sentences {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

pub fn parse_kb(text: &str) -> Result<KnowledgeBase, KbError> {
    let mut sentences = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
        if body.is_empty() {
            continue;
        }
        let (formula, interval) = parse_sentence(body).map_err(|kind| KbError { line, kind })?;
        sentences.push(Sentence {
            formula,
            interval,
            origin: Origin::Given { line },
        });
    }
    Ok(KnowledgeBase::new(sentences))
}

fn syntax(msg: &str) -> KbErrorKind {
    KbErrorKind::Syntax(msg.to_string())
}

fn parse_sentence(body: &str) -> Result<(Formula, ProbInterval), KbErrorKind> {
    let rest = body
        .strip_prefix('P')
        .map(str::trim_start)
        .and_then(|r| r.strip_prefix('('))
        .ok_or_else(|| syntax("expected `P(`"))?;

    let mut depth = 1usize;
    let close = rest
        .char_indices()
        .find(|&(_, c)| {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            depth == 0
        })
        .map(|(i, _)| i)
        .ok_or_else(|| syntax("unbalanced parentheses"))?;
    let formula = parse_formula(&rest[..close])?;

    let rest = rest[close + 1..]
        .trim_start()
        .strip_prefix("in")
        .ok_or_else(|| syntax("expected `in` after formula"))?
        .trim();
    let inner = rest
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| syntax("expected `[lo, hi]`"))?;
    let (lo, hi) = inner
        .split_once(',')
        .ok_or_else(|| syntax("expected `,` between endpoints"))?;
    let interval = ProbInterval::new(parse_rational(lo)?, parse_rational(hi)?)?;
    Ok((formula, interval))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    /// Two sentences about the same formula (by canonical key) whose
    /// intervals do not overlap.
    DisjointDuplicate {
        formula: Formula,
        first: Origin,
        second: Origin,
    },
    /// More atoms than the exact oracle is configured to enumerate.
    AtomCapExceeded { atoms: usize, cap: usize },
    /// A query about a formula the engine does not track.
    TargetOutsideUniverse { formula: Formula },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let loc = |o: &Origin| match o {
            Origin::Given { line } => format!("line {line}"),
            other => format!("{other:?}"),
        };
        match self {
            Diagnostic::DisjointDuplicate {
                formula,
                first,
                second,
            } => write!(
                f,
                "warning: disjoint intervals for `{formula}` ({} and {})",
                loc(first),
                loc(second)
            ),
            Diagnostic::AtomCapExceeded { atoms, cap } => write!(
                f,
                "warning: {atoms} atoms exceeds the exact-mode atom cap of {cap}"
            ),
            Diagnostic::TargetOutsideUniverse { formula } => {
                write!(f, "warning: `{formula}` is outside the derivation universe")
            }
        }
    }
}

/// Non-fatal checks on a parsed KB.
pub fn validate(kb: &KnowledgeBase, atom_cap: usize) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen: HashMap<Formula, Vec<&Sentence>> = HashMap::new();
    for s in &kb.sentences {
        let earlier = seen.entry(s.formula.canonical_key()).or_default();
        for prev in earlier.iter() {
            if prev.interval.intersect(&s.interval).is_empty() {
                out.push(Diagnostic::DisjointDuplicate {
                    formula: s.formula.clone(),
                    first: prev.origin,
                    second: s.origin,
                });
            }
        }
        earlier.push(s);
    }
    if kb.atoms.len() > atom_cap {
        out.push(Diagnostic::AtomCapExceeded {
            atoms: kb.atoms.len(),
            cap: atom_cap,
        });
    }
    out
}
