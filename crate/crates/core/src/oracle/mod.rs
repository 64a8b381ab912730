//! Exact probabilistic entailment by linear programming over possible
//! worlds.
//!
//! A probabilistic model is a distribution over the truth assignments to the
//! KB's atoms. Each sentence bounds the total mass of the worlds satisfying
//! its formula, and the entailed interval of a target is the minimum and
//! maximum of the target's mass over every distribution meeting those bounds.

mod simplex;

use std::io::Write;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::formula::{Formula, World};
use crate::interval::{ProbInterval, Rational};
use crate::kb::KnowledgeBase;

pub use simplex::{lp_solve, Constraint, Direction, LinearProgram, LpOutcome, Relation};

/// Largest number of atoms the oracle enumerates by default.
pub const DEFAULT_ATOM_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{atoms} atoms exceeds the cap of {cap} (2^{atoms} worlds)")]
    AtomCapExceeded { atoms: usize, cap: usize },
    #[error("unexpected LP outcome: {0:?}")]
    Solver(LpOutcome),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// All truth assignments over an ordered atom list, plus which worlds
/// satisfy each of a list of formulas.
///
/// World `w` assigns atom `i` the bit `k - 1 - i` of `w`, so worlds are in
/// binary counting order with the first atom most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldTable {
    atoms: Vec<String>,
    formulas: Vec<Formula>,
    sat: Vec<Vec<bool>>,
}

impl WorldTable {
    pub fn enumerate(atoms: Vec<String>, cap: usize) -> Result<Self, OracleError> {
        if atoms.len() > cap || atoms.len() >= usize::BITS as usize {
            return Err(OracleError::AtomCapExceeded {
                atoms: atoms.len(),
                cap,
            });
        }
        Ok(WorldTable {
            atoms,
            formulas: Vec::new(),
            sat: Vec::new(),
        })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn num_worlds(&self) -> usize {
        1usize << self.atoms.len()
    }

    pub fn value(&self, world: usize, atom: usize) -> bool {
        (world >> (self.atoms.len() - 1 - atom)) & 1 == 1
    }

    pub fn world(&self, index: usize) -> World {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), self.value(index, i)))
            .collect()
    }

    pub fn worlds(&self) -> impl Iterator<Item = World> + '_ {
        (0..self.num_worlds()).map(|w| self.world(w))
    }

    /// Adds a formula column and returns its index. Every atom of `f` must
    /// be in the table.
    pub fn add_formula(&mut self, f: &Formula) -> usize {
        let position = |name: &str| self.atoms.iter().position(|a| a == name);
        let column = (0..self.num_worlds())
            .map(|w| {
                f.evaluate_with(&|name| position(name).map(|i| self.value(w, i)))
                    .expect("formula atoms are covered by the table")
            })
            .collect();
        self.formulas.push(f.clone());
        self.sat.push(column);
        self.sat.len() - 1
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    /// Indices of the worlds satisfying formula column `i`.
    pub fn satisfying(&self, i: usize) -> Vec<usize> {
        self.sat[i]
            .iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(w, _)| w)
            .collect()
    }

    pub fn satisfies(&self, formula: usize, world: usize) -> bool {
        self.sat[formula][world]
    }

    /// Table over the atoms of `kb` and `target`, with one column per KB
    /// sentence followed by the target's column.
    pub fn for_query(
        kb: &KnowledgeBase,
        target: Option<&Formula>,
        cap: usize,
    ) -> Result<Self, OracleError> {
        let mut atoms = kb.atoms().clone();
        if let Some(t) = target {
            atoms.extend(t.atoms());
        }
        let mut table = Self::enumerate(atoms.into_iter().collect(), cap)?;
        for s in kb.sentences() {
            table.add_formula(&s.formula);
        }
        if let Some(t) = target {
            table.add_formula(t);
        }
        Ok(table)
    }

    /// CSV: one column per atom, then a 0/1 column `P(formula)` per
    /// formula column, one row per world.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), OracleError> {
        let mut writer = csv::Writer::from_writer(out);
        let header: Vec<String> = self
            .atoms
            .iter()
            .cloned()
            .chain(self.formulas.iter().map(|f| format!("P({f})")))
            .collect();
        writer.write_record(&header)?;
        for w in 0..self.num_worlds() {
            let bit = |b: bool| if b { "1" } else { "0" };
            let record: Vec<&str> = (0..self.atoms.len())
                .map(|i| bit(self.value(w, i)))
                .chain(self.sat.iter().map(|col| bit(col[w])))
                .collect();
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Builds the LP whose variables are world masses: total mass one, each
/// sentence's mass within its interval, objective the target's mass.
/// `table` must come from [`WorldTable::for_query`] with the same KB. With
/// no target column the objective is zero, which only tests feasibility.
pub fn build_lp(
    kb: &KnowledgeBase,
    table: &WorldTable,
    target_column: Option<usize>,
) -> LinearProgram {
    let mut constraints = vec![Constraint {
        vars: (0..table.num_worlds()).collect(),
        relation: Relation::Eq,
        rhs: Rational::one(),
    }];
    for (i, s) in kb.sentences().iter().enumerate() {
        let vars = table.satisfying(i);
        match s.interval.bounds() {
            None => {
                // An empty interval cannot be met by any distribution.
                constraints.push(Constraint {
                    vars: Vec::new(),
                    relation: Relation::Eq,
                    rhs: Rational::one(),
                });
            }
            Some((lo, hi)) if lo == hi => constraints.push(Constraint {
                vars,
                relation: Relation::Eq,
                rhs: lo.clone(),
            }),
            Some((lo, hi)) => {
                if !lo.is_zero() {
                    constraints.push(Constraint {
                        vars: vars.clone(),
                        relation: Relation::Ge,
                        rhs: lo.clone(),
                    });
                }
                if !hi.is_one() {
                    constraints.push(Constraint {
                        vars,
                        relation: Relation::Le,
                        rhs: hi.clone(),
                    });
                }
            }
        }
    }
    LinearProgram {
        num_vars: table.num_worlds(),
        constraints,
        objective: target_column.map_or_else(Vec::new, |c| table.satisfying(c)),
    }
}

fn solve_interval(lp: &LinearProgram) -> Result<ProbInterval, OracleError> {
    let lo = match lp_solve(lp, Direction::Min) {
        LpOutcome::Optimal(v) => v,
        LpOutcome::Infeasible => return Ok(ProbInterval::Empty),
        other => return Err(OracleError::Solver(other)),
    };
    let hi = match lp_solve(lp, Direction::Max) {
        LpOutcome::Optimal(v) => v,
        other => return Err(OracleError::Solver(other)),
    };
    ProbInterval::new(lo, hi).map_err(|_| OracleError::Solver(LpOutcome::Unbounded))
}

/// The least interval `I` such that the KB entails `P(target) ∈ I`; empty
/// iff no distribution satisfies the KB.
pub fn entailed_interval(
    kb: &KnowledgeBase,
    target: &Formula,
    cap: usize,
) -> Result<ProbInterval, OracleError> {
    let table = WorldTable::for_query(kb, Some(target), cap)?;
    let lp = build_lp(kb, &table, Some(kb.len()));
    solve_interval(&lp.merge_identical_columns())
}

/// Same answer as [`entailed_interval`] but over one variable per world,
/// without merging worlds that no sentence distinguishes.
pub fn entailed_interval_unmerged(
    kb: &KnowledgeBase,
    target: &Formula,
    cap: usize,
) -> Result<ProbInterval, OracleError> {
    let table = WorldTable::for_query(kb, Some(target), cap)?;
    solve_interval(&build_lp(kb, &table, Some(kb.len())))
}

/// Whether some distribution over worlds satisfies every sentence.
pub fn is_consistent(kb: &KnowledgeBase, cap: usize) -> Result<bool, OracleError> {
    let table = WorldTable::for_query(kb, None, cap)?;
    let lp = build_lp(kb, &table, None);
    match lp_solve(&lp.merge_identical_columns(), Direction::Min) {
        LpOutcome::Optimal(_) => Ok(true),
        LpOutcome::Infeasible => Ok(false),
        other => Err(OracleError::Solver(other)),
    }
}
