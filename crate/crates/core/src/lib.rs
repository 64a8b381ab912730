//! Interval-probability logic over propositional formulas.
//!
//! Two ways to answer "what does this knowledge base say about `P(φ)`":
//!
//! * [`engine`] applies sound interval rules until nothing changes (or a
//!   round cap is hit). Its answer is available at any point and only ever
//!   narrows, but it may stay wider than the best possible bound.
//! * [`oracle`] solves the question exactly as a pair of linear programs
//!   over all possible worlds.

pub mod engine;
pub mod formula;
pub mod interval;
pub mod kb;
pub mod oracle;
pub mod rules;

pub use engine::{BeliefState, DerivationStep, EngineLimits, EngineResult};
pub use formula::{parse_formula, Formula, FormulaError, World};
pub use interval::{ProbInterval, Rational};
pub use kb::{parse_kb, validate, Diagnostic, KnowledgeBase, Origin, Sentence};
pub use oracle::{entailed_interval, is_consistent, OracleError, WorldTable, DEFAULT_ATOM_CAP};
pub use rules::RuleId;
