//! Anytime saturation over a finite formula universe.
//!
//! Every tracked formula carries a current derived interval that starts at
//! `[0, 1]`, is intersected with the knowledge base, and then only ever
//! shrinks as rule conclusions are intersected in. The run can be stopped
//! after any round and the current interval is still sound.

use std::collections::HashMap;

use num_traits::Zero;
use serde::Serialize;

use crate::formula::{and, not, or, Formula};
use crate::interval::{format_rational, ProbInterval, Rational};
use crate::kb::{Diagnostic, KnowledgeBase, Origin, Sentence};
use crate::rules::{self, RuleId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineLimits {
    pub max_rounds: usize,
    /// A round whose largest width reduction is at or below this stops the
    /// run. Zero means run to an exact fixpoint.
    pub min_improvement: Rational,
    pub snapshot_every: Option<usize>,
}

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits {
            max_rounds: 100,
            min_improvement: Rational::zero(),
            snapshot_every: None,
        }
    }
}

/// A premise as it was used: the formula, its interval at the time, and the
/// step that produced that interval (`None` for given or vacuous beliefs).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Premise {
    pub formula: Formula,
    pub interval: ProbInterval,
    pub support: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationStep {
    pub rule: RuleId,
    pub premises: Vec<Premise>,
    pub conclusion: Sentence,
    pub round: usize,
}

impl DerivationStep {
    /// Re-applies the rule to the recorded premises.
    pub fn replay(&self) -> Result<Sentence, rules::RuleError> {
        let premises: Vec<Sentence> = self
            .premises
            .iter()
            .map(|p| Sentence::new(p.formula.clone(), p.interval.clone()))
            .collect();
        rules::apply(self.rule, &premises)
    }

    pub fn to_record(&self) -> StepRecord {
        StepRecord {
            round: self.round,
            rule: self.rule,
            premises: self
                .premises
                .iter()
                .map(|p| TermRecord::new(&p.formula, &p.interval))
                .collect(),
            conclusion: TermRecord::new(&self.conclusion.formula, &self.conclusion.interval),
        }
    }
}

/// Serialized form of a derivation step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub round: usize,
    pub rule: RuleId,
    pub premises: Vec<TermRecord>,
    pub conclusion: TermRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermRecord {
    pub formula: String,
    pub lo: Option<String>,
    pub hi: Option<String>,
}

impl TermRecord {
    fn new(formula: &Formula, interval: &ProbInterval) -> Self {
        TermRecord {
            formula: formula.to_string(),
            lo: interval.lo().map(format_rational),
            hi: interval.hi().map(format_rational),
        }
    }
}

/// JSON array of steps, in derivation order.
pub fn trace_to_json(steps: &[DerivationStep]) -> serde_json::Value {
    serde_json::to_value(
        steps
            .iter()
            .map(DerivationStep::to_record)
            .collect::<Vec<_>>(),
    )
    .expect("trace records serialize")
}

#[derive(Clone, Debug)]
struct Implication {
    shape: Formula,
    clause: usize,
    antecedent: usize,
    antecedent_shape: Formula,
}

#[derive(Clone, Debug)]
struct Horn {
    shape: Formula,
    clause: usize,
    conjuncts: Vec<(usize, Formula)>,
}

#[derive(Clone, Debug)]
struct Combination {
    left: usize,
    right: usize,
    result: usize,
}

/// The formulas the engine tracks and every rule instance among them,
/// computed once up front.
#[derive(Clone, Debug)]
struct Universe {
    keys: Vec<Formula>,
    display: Vec<Formula>,
    index: HashMap<Formula, usize>,
    negation: Vec<usize>,
    conjunctions: Vec<Combination>,
    disjunctions: Vec<Combination>,
    horns: Vec<Horn>,
    implications: Vec<Implication>,
}

impl Universe {
    fn build(roots: &[&Formula]) -> Self {
        let mut u = Universe {
            keys: Vec::new(),
            display: Vec::new(),
            index: HashMap::new(),
            negation: Vec::new(),
            conjunctions: Vec::new(),
            disjunctions: Vec::new(),
            horns: Vec::new(),
            implications: Vec::new(),
        };
        let mut shapes = Vec::new();
        for root in roots {
            for sub in root.subformulas() {
                u.insert(sub);
                u.insert(&not(sub.clone()));
                if let Formula::Implies(..) = sub {
                    shapes.push(sub.clone());
                }
            }
        }

        u.negation = u
            .display
            .iter()
            .map(|f| {
                u.id(&not(f.clone()))
                    .expect("universe is closed under negation")
            })
            .collect();

        let n = u.keys.len();
        for left in 0..n {
            for right in left + 1..n {
                let (l, r) = (u.display[left].clone(), u.display[right].clone());
                if let Some(result) = u.id(&and(l.clone(), r.clone())) {
                    u.conjunctions.push(Combination {
                        left,
                        right,
                        result,
                    });
                }
                if let Some(result) = u.id(&or(l, r)) {
                    u.disjunctions.push(Combination {
                        left,
                        right,
                        result,
                    });
                }
            }
        }

        let mut seen_implications = std::collections::HashSet::new();
        let mut seen_horns = std::collections::HashSet::new();
        for shape in shapes {
            let Formula::Implies(antecedent, _) = &shape else {
                unreachable!()
            };
            let clause = u.id(&shape).expect("shape is a subformula");
            let antecedent_id = u.id(antecedent).expect("antecedent is a subformula");
            let conjuncts: Vec<(usize, Formula)> = antecedent
                .conjuncts()
                .into_iter()
                .map(|c| (u.id(c).expect("conjunct is a subformula"), c.clone()))
                .collect();
            let consequent = {
                let Formula::Implies(_, b) = &shape else {
                    unreachable!()
                };
                u.id(b).expect("consequent is a subformula")
            };
            if conjuncts.len() >= 2
                && seen_horns.insert((
                    clause,
                    conjuncts.iter().map(|c| c.0).collect::<Vec<_>>(),
                    consequent,
                ))
            {
                u.horns.push(Horn {
                    shape: shape.clone(),
                    clause,
                    conjuncts,
                });
            }
            if seen_implications.insert((clause, antecedent_id, consequent)) {
                u.implications.push(Implication {
                    antecedent_shape: (**antecedent).clone(),
                    shape,
                    clause,
                    antecedent: antecedent_id,
                });
            }
        }
        u
    }

    fn insert(&mut self, f: &Formula) {
        let key = f.canonical_key();
        if !self.index.contains_key(&key) {
            self.index.insert(key.clone(), self.keys.len());
            self.keys.push(key);
            self.display.push(f.clone());
        }
    }

    fn id(&self, f: &Formula) -> Option<usize> {
        self.index.get(&f.canonical_key()).copied()
    }

    /// Every rule instance, in the fixed order rounds evaluate them.
    fn firings(&self) -> Vec<Firing> {
        let u = self;
        let mut out = Vec::new();
        for (id, &neg) in u.negation.iter().enumerate() {
            out.push(Firing {
                rule: RuleId::Negation,
                premises: vec![(id, u.display[id].clone())],
                conclusion: neg,
            });
        }
        for (rule, combos) in [
            (RuleId::Conjunction, &u.conjunctions),
            (RuleId::DisjunctionDerived, &u.disjunctions),
        ] {
            for c in combos {
                out.push(Firing {
                    rule,
                    premises: vec![
                        (c.left, u.display[c.left].clone()),
                        (c.right, u.display[c.right].clone()),
                    ],
                    conclusion: c.result,
                });
            }
        }
        for h in &u.horns {
            let mut premises = vec![(h.clause, h.shape.clone())];
            premises.extend(h.conjuncts.iter().cloned());
            let Formula::Implies(_, b) = &h.shape else {
                unreachable!()
            };
            out.push(Firing {
                rule: RuleId::Horn,
                premises,
                conclusion: u.id(b).expect("consequent tracked"),
            });
        }
        for i in &u.implications {
            let Formula::Implies(_, b) = &i.shape else {
                unreachable!()
            };
            out.push(Firing {
                rule: RuleId::Implication,
                premises: vec![
                    (i.antecedent, i.antecedent_shape.clone()),
                    (i.clause, i.shape.clone()),
                ],
                conclusion: u.id(b).expect("consequent tracked"),
            });
        }
        out
    }
}

#[derive(Clone, Debug)]
/// One rule instance to be evaluated: the rule, its premises by universe
/// id with the formula shape to present, and the conclusion's id.
struct Firing {
    rule: RuleId,
    premises: Vec<(usize, Formula)>,
    conclusion: usize,
}

#[derive(Clone, Debug)]
pub struct BeliefState {
    universe: Universe,
    beliefs: Vec<ProbInterval>,
    best: Vec<Option<usize>>,
    changed_at: Vec<usize>,
    firings: Vec<Firing>,
    steps: Vec<DerivationStep>,
    round: usize,
    inconsistent: bool,
    /// Formula whose belief became empty.
    conflict: Option<usize>,
    last_improvement: Rational,
}

impl BeliefState {
    /// Builds the universe from the KB and target, starts every formula at
    /// `[0, 1]`, and intersects each KB sentence into its formula's belief.
    pub fn new(kb: &KnowledgeBase, target: &Formula) -> Self {
        Self::with_roots(kb, Some(target))
    }

    /// A state tracking only the KB's own formulas, for consistency checks.
    pub fn for_kb(kb: &KnowledgeBase) -> Self {
        Self::with_roots(kb, None)
    }

    fn with_roots(kb: &KnowledgeBase, target: Option<&Formula>) -> Self {
        let roots: Vec<&Formula> = kb
            .sentences()
            .iter()
            .map(|s| &s.formula)
            .chain(target)
            .collect();
        let universe = Universe::build(&roots);
        let n = universe.keys.len();
        let firings = universe.firings();
        let mut state = BeliefState {
            universe,
            firings,
            beliefs: vec![ProbInterval::unit(); n],
            best: vec![None; n],
            changed_at: vec![0; n],
            steps: Vec::new(),
            round: 0,
            inconsistent: false,
            conflict: None,
            last_improvement: Rational::zero(),
        };
        let mut given = vec![false; n];
        for s in kb.sentences() {
            let id = state
                .universe
                .id(&s.formula)
                .expect("KB formulas are in the universe");
            if !given[id] {
                given[id] = true;
                state.beliefs[id] = state.beliefs[id].intersect(&s.interval);
                continue;
            }
            let current = Premise {
                formula: state.universe.display[id].clone(),
                interval: state.beliefs[id].clone(),
                support: state.best[id],
            };
            let incoming = Premise {
                formula: s.formula.clone(),
                interval: s.interval.clone(),
                support: None,
            };
            let merged = current.interval.intersect(&s.interval);
            if merged != current.interval {
                state.steps.push(DerivationStep {
                    rule: RuleId::MultipleDerivation,
                    conclusion: Sentence {
                        formula: current.formula.clone(),
                        interval: merged.clone(),
                        origin: Origin::Derived {
                            rule: RuleId::MultipleDerivation,
                        },
                    },
                    premises: vec![current, incoming],
                    round: 0,
                });
                state.best[id] = Some(state.steps.len() - 1);
                state.beliefs[id] = merged;
            }
            if state.beliefs[id].is_empty() {
                state.inconsistent = true;
                state.conflict = Some(id);
                break;
            }
        }
        state
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    /// Canonical formula and current interval for every tracked formula.
    pub fn beliefs(&self) -> impl Iterator<Item = (&Formula, &ProbInterval)> {
        self.universe.keys.iter().zip(&self.beliefs)
    }

    /// Readable (first-seen) form of each tracked formula, aligned with
    /// [`beliefs`](Self::beliefs).
    pub fn formulas(&self) -> &[Formula] {
        &self.universe.display
    }

    pub fn belief(&self, f: &Formula) -> Option<&ProbInterval> {
        self.universe.id(f).map(|id| &self.beliefs[id])
    }

    pub fn steps(&self) -> &[DerivationStep] {
        &self.steps
    }

    /// The current derived interval for `target`. Untracked formulas read as
    /// `[0, 1]` with a diagnostic; an inconsistent state reads as empty.
    pub fn snapshot(&self, target: &Formula) -> (ProbInterval, Option<Diagnostic>) {
        if self.inconsistent {
            return (ProbInterval::Empty, None);
        }
        match self.belief(target) {
            Some(i) => (i.clone(), None),
            None => (
                ProbInterval::unit(),
                Some(Diagnostic::TargetOutsideUniverse {
                    formula: target.clone(),
                }),
            ),
        }
    }

    /// The formula whose belief became empty, if any.
    pub fn conflict(&self) -> Option<&Formula> {
        self.conflict.map(|id| &self.universe.display[id])
    }

    /// Steps supporting the current belief in `target`, in derivation order.
    pub fn trace_for(&self, target: &Formula) -> Vec<DerivationStep> {
        let Some(start) = self.universe.id(target).and_then(|id| self.best[id]) else {
            return Vec::new();
        };
        let mut reached = vec![false; self.steps.len()];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut reached[i], true) {
                continue;
            }
            stack.extend(self.steps[i].premises.iter().filter_map(|p| p.support));
        }
        reached
            .iter()
            .enumerate()
            .filter(|(_, r)| **r)
            .map(|(i, _)| self.steps[i].clone())
            .collect()
    }

    /// Applies every rule instance with at least one premise that changed in
    /// the previous round or earlier in this one. Returns whether any belief
    /// strictly shrank. Stops early, marking the state inconsistent, as soon
    /// as a belief becomes empty.
    pub fn saturate_round(&mut self) -> bool {
        if self.inconsistent {
            return false;
        }
        self.round += 1;
        self.last_improvement = Rational::zero();
        let mut changed = false;
        let firings = std::mem::take(&mut self.firings);
        for firing in &firings {
            let fresh = firing
                .premises
                .iter()
                .any(|(id, _)| self.changed_at[*id] + 1 >= self.round);
            if !fresh {
                continue;
            }
            changed |= self.fire(firing);
            if self.inconsistent {
                break;
            }
        }
        self.firings = firings;
        changed
    }

    fn fire(&mut self, firing: &Firing) -> bool {
        let premises: Vec<Premise> = firing
            .premises
            .iter()
            .map(|(id, shape)| Premise {
                formula: shape.clone(),
                interval: self.beliefs[*id].clone(),
                support: self.best[*id],
            })
            .collect();
        let sentences: Vec<Sentence> = premises
            .iter()
            .map(|p| Sentence::new(p.formula.clone(), p.interval.clone()))
            .collect();
        let conclusion = rules::apply(firing.rule, &sentences)
            .unwrap_or_else(|e| panic!("precomputed {} instance rejected: {e}", firing.rule));

        let target = firing.conclusion;
        let current = self.beliefs[target].clone();
        let merged = current.intersect(&conclusion.interval);
        if merged == current {
            return false;
        }

        let improvement = current.width() - merged.width();
        if improvement > self.last_improvement {
            self.last_improvement = improvement;
        }

        let derived = conclusion.interval.clone();
        let conclusion_formula = conclusion.formula.clone();
        self.steps.push(DerivationStep {
            rule: firing.rule,
            premises,
            conclusion,
            round: self.round,
        });
        let mut best = self.steps.len() - 1;
        if merged != derived {
            self.steps.push(DerivationStep {
                rule: RuleId::MultipleDerivation,
                premises: vec![
                    Premise {
                        formula: self.universe.display[target].clone(),
                        interval: current,
                        support: self.best[target],
                    },
                    Premise {
                        formula: conclusion_formula,
                        interval: derived,
                        support: Some(best),
                    },
                ],
                conclusion: Sentence {
                    formula: self.universe.display[target].clone(),
                    interval: merged.clone(),
                    origin: Origin::Derived {
                        rule: RuleId::MultipleDerivation,
                    },
                },
                round: self.round,
            });
            best = self.steps.len() - 1;
        }
        self.best[target] = Some(best);
        self.changed_at[target] = self.round;
        if merged.is_empty() {
            self.inconsistent = true;
            self.conflict = Some(target);
        }
        self.beliefs[target] = merged;
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineResult {
    pub interval: ProbInterval,
    pub consistent: bool,
    pub rounds_used: usize,
    /// True when the run stopped because nothing could change any more
    /// (including detected inconsistency), false when a limit stopped it.
    pub converged: bool,
    pub snapshots: Vec<(usize, ProbInterval)>,
    /// Derivation of the target's interval, or of the empty interval when
    /// the KB was found inconsistent.
    pub trace: Vec<DerivationStep>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Runs the engine to a fixpoint, an inconsistency, or a limit.
pub fn run(kb: &KnowledgeBase, target: &Formula, limits: &EngineLimits) -> EngineResult {
    run_with(kb, target, limits, |_, _| {})
}

/// Like [`run`], calling `observe` with each snapshot as it is taken.
pub fn run_with<F>(
    kb: &KnowledgeBase,
    target: &Formula,
    limits: &EngineLimits,
    mut observe: F,
) -> EngineResult
where
    F: FnMut(usize, &ProbInterval),
{
    let mut state = BeliefState::new(kb, target);
    let mut snapshots = Vec::new();
    let mut take = |state: &BeliefState, snapshots: &mut Vec<(usize, ProbInterval)>| {
        let (interval, _) = state.snapshot(target);
        observe(state.round(), &interval);
        snapshots.push((state.round(), interval));
    };
    let every = limits.snapshot_every.filter(|k| *k > 0);
    if every.is_some() {
        take(&state, &mut snapshots);
    }

    let max_rounds = limits.max_rounds.max(1);
    let mut converged = state.is_inconsistent();
    while !state.is_inconsistent() && state.round() < max_rounds {
        let changed = state.saturate_round();
        if let Some(k) = every {
            if state.round().is_multiple_of(k) {
                take(&state, &mut snapshots);
            }
        }
        if !changed || state.is_inconsistent() {
            converged = true;
            break;
        }
        if state.last_improvement <= limits.min_improvement && !limits.min_improvement.is_zero() {
            break;
        }
    }
    if every.is_some() && snapshots.last().map(|s| s.0) != Some(state.round()) {
        take(&state, &mut snapshots);
    }

    let (interval, diagnostic) = state.snapshot(target);
    EngineResult {
        consistent: !state.is_inconsistent(),
        rounds_used: state.round(),
        converged,
        snapshots,
        trace: match state.conflict() {
            Some(conflict) => state.trace_for(conflict),
            None => state.trace_for(target),
        },
        diagnostics: diagnostic.into_iter().collect(),
        interval,
    }
}
