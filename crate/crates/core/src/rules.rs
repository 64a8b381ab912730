//! Sound inference rules over interval-probability sentences.
//!
//! Each rule is a pure function from premise sentences to a conclusion.
//! Endpoints are clamped only where the rule's own `max(0, ..)` or
//! `min(1, ..)` does so.

use std::cmp::{max, min};
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::formula::{and, not, or, Formula};
use crate::interval::{ProbInterval, Rational};
use crate::kb::{Origin, Sentence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleId {
    Negation,
    Conjunction,
    Implication,
    Horn,
    MultipleDerivation,
    DisjunctionDerived,
}

impl RuleId {
    pub const ALL: [RuleId; 6] = [
        RuleId::Negation,
        RuleId::Conjunction,
        RuleId::Implication,
        RuleId::Horn,
        RuleId::MultipleDerivation,
        RuleId::DisjunctionDerived,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Negation => "negation",
            RuleId::Conjunction => "conjunction",
            RuleId::Implication => "implication",
            RuleId::Horn => "horn",
            RuleId::MultipleDerivation => "multiple-derivation",
            RuleId::DisjunctionDerived => "disjunction-derived",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("premise `{0}` has an empty interval")]
    EmptyPremise(Formula),
    #[error("`{0}` is not an implication")]
    NotAnImplication(Formula),
    #[error("premise `{premise}` does not match antecedent `{antecedent}`")]
    AntecedentMismatch {
        antecedent: Formula,
        premise: Formula,
    },
    #[error("horn clause has {expected} antecedent conjuncts but {found} premises were given")]
    Arity { expected: usize, found: usize },
    #[error("`{0}` and `{1}` are different formulas")]
    FormulaMismatch(Formula, Formula),
    #[error("{rule} takes {expected} premises, got {found}")]
    PremiseCount {
        rule: RuleId,
        expected: usize,
        found: usize,
    },
}

fn bounds(s: &Sentence) -> Result<(&Rational, &Rational), RuleError> {
    s.interval
        .bounds()
        .ok_or_else(|| RuleError::EmptyPremise(s.formula.clone()))
}

fn conclude(rule: RuleId, formula: Formula, lo: Rational, hi: Rational) -> Sentence {
    // A failure here means the arithmetic below is wrong, not the input.
    let interval = ProbInterval::new(lo, hi)
        .unwrap_or_else(|e| panic!("{rule} produced an invalid interval: {e}"));
    Sentence {
        formula,
        interval,
        origin: Origin::Derived { rule },
    }
}

fn zero() -> Rational {
    Rational::zero()
}

fn one() -> Rational {
    Rational::one()
}

/// `P(A) ∈ [x, y] ⊢ P(¬A) ∈ [1 − y, 1 − x]`.
pub fn negation_rule(s: &Sentence) -> Result<Sentence, RuleError> {
    let (x, y) = bounds(s)?;
    Ok(conclude(
        RuleId::Negation,
        not(s.formula.clone()),
        one() - y,
        one() - x,
    ))
}

/// `P(A) ∈ [x, y], P(B) ∈ [u, v] ⊢ P(A & B) ∈ [max(0, x + u − 1), min(y, v)]`.
pub fn conjunction_rule(s1: &Sentence, s2: &Sentence) -> Result<Sentence, RuleError> {
    let (x, y) = bounds(s1)?;
    let (u, v) = bounds(s2)?;
    Ok(conclude(
        RuleId::Conjunction,
        and(s1.formula.clone(), s2.formula.clone()),
        max(zero(), x + u - one()),
        min(y, v).clone(),
    ))
}

/// `P(A) ∈ [x, y], P(A → B) ∈ [u, v] ⊢ P(B) ∈ [max(0, x + u − 1), v]`.
pub fn implication_rule(premise: &Sentence, implication: &Sentence) -> Result<Sentence, RuleError> {
    let (x, _) = bounds(premise)?;
    let (u, v) = bounds(implication)?;
    let Formula::Implies(antecedent, consequent) = &implication.formula else {
        return Err(RuleError::NotAnImplication(implication.formula.clone()));
    };
    if antecedent.canonical_key() != premise.formula.canonical_key() {
        return Err(RuleError::AntecedentMismatch {
            antecedent: (**antecedent).clone(),
            premise: premise.formula.clone(),
        });
    }
    Ok(conclude(
        RuleId::Implication,
        (**consequent).clone(),
        max(zero(), x + u - one()),
        v.clone(),
    ))
}

/// `P(A₁ & … & Aₙ → B) ∈ [x, y], P(Aᵢ) ∈ [uᵢ, vᵢ] ⊢ P(B) ∈ [max(0, x + Σuᵢ − n), y]`.
///
/// The antecedent may associate its conjunction either way. Premises are
/// matched to conjuncts as a multiset by canonical key.
pub fn horn_rule(clause: &Sentence, premises: &[Sentence]) -> Result<Sentence, RuleError> {
    let (x, y) = bounds(clause)?;
    let Formula::Implies(antecedent, consequent) = &clause.formula else {
        return Err(RuleError::NotAnImplication(clause.formula.clone()));
    };
    let conjuncts = antecedent.conjuncts();
    if conjuncts.len() != premises.len() {
        return Err(RuleError::Arity {
            expected: conjuncts.len(),
            found: premises.len(),
        });
    }
    let mut unused: Vec<(Formula, &Sentence)> = premises
        .iter()
        .map(|p| (p.formula.canonical_key(), p))
        .collect();
    let mut lower = x.clone();
    for conjunct in conjuncts {
        let key = conjunct.canonical_key();
        let pos = unused.iter().position(|(k, _)| *k == key).ok_or_else(|| {
            RuleError::AntecedentMismatch {
                antecedent: conjunct.clone(),
                premise: unused
                    .first()
                    .map_or_else(|| conjunct.clone(), |(_, p)| p.formula.clone()),
            }
        })?;
        let (_, premise) = unused.swap_remove(pos);
        lower += bounds(premise)?.0;
    }
    lower -= Rational::from_integer(premises.len().into());
    Ok(conclude(
        RuleId::Horn,
        (**consequent).clone(),
        max(zero(), lower),
        y.clone(),
    ))
}

/// Intersects two derivations of the same formula. The only rule that can
/// produce the empty interval, which means the premises are inconsistent.
pub fn multiple_derivation(s1: &Sentence, s2: &Sentence) -> Result<Sentence, RuleError> {
    if s1.formula.canonical_key() != s2.formula.canonical_key() {
        return Err(RuleError::FormulaMismatch(
            s1.formula.clone(),
            s2.formula.clone(),
        ));
    }
    Ok(Sentence {
        formula: s1.formula.clone(),
        interval: s1.interval.intersect(&s2.interval),
        origin: Origin::Derived {
            rule: RuleId::MultipleDerivation,
        },
    })
}

/// `P(A) ∈ [x, y], P(B) ∈ [u, v] ⊢ P(A | B) ∈ [max(x, u), min(1, y + v)]`,
/// i.e. negation, conjunction and negation again through De Morgan.
pub fn disjunction_rule(s1: &Sentence, s2: &Sentence) -> Result<Sentence, RuleError> {
    let (x, y) = bounds(s1)?;
    let (u, v) = bounds(s2)?;
    Ok(conclude(
        RuleId::DisjunctionDerived,
        or(s1.formula.clone(), s2.formula.clone()),
        max(x, u).clone(),
        min(one(), y + v),
    ))
}

/// Dispatches on `rule`. Premise order follows each rule's signature; for
/// `Horn` the clause comes first, then the antecedent premises.
pub fn apply(rule: RuleId, premises: &[Sentence]) -> Result<Sentence, RuleError> {
    let arity = |expected: usize| {
        if premises.len() == expected {
            Ok(())
        } else {
            Err(RuleError::PremiseCount {
                rule,
                expected,
                found: premises.len(),
            })
        }
    };
    match rule {
        RuleId::Negation => {
            arity(1)?;
            negation_rule(&premises[0])
        }
        RuleId::Conjunction => {
            arity(2)?;
            conjunction_rule(&premises[0], &premises[1])
        }
        RuleId::Implication => {
            arity(2)?;
            implication_rule(&premises[0], &premises[1])
        }
        RuleId::Horn => match premises.split_first() {
            Some((clause, rest)) => horn_rule(clause, rest),
            None => Err(RuleError::PremiseCount {
                rule,
                expected: 1,
                found: 0,
            }),
        },
        RuleId::MultipleDerivation => {
            arity(2)?;
            multiple_derivation(&premises[0], &premises[1])
        }
        RuleId::DisjunctionDerived => {
            arity(2)?;
            disjunction_rule(&premises[0], &premises[1])
        }
    }
}
