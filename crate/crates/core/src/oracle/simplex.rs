//! Dense two-phase simplex over exact rationals, with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::interval::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// `Σ_{j ∈ vars} x_j  (≤ | ≥ | =)  rhs`. Every coefficient is one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub vars: Vec<usize>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Optimize `Σ_{j ∈ objective} x_j` over `x ≥ 0` subject to `constraints`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(Rational),
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    /// Merges columns that appear in exactly the same constraints and
    /// objective. The merged variable carries their combined mass, so the
    /// optimum is unchanged.
    pub fn merge_identical_columns(&self) -> LinearProgram {
        let mut signature: Vec<Vec<bool>> = vec![Vec::new(); self.num_vars];
        for vars in self
            .constraints
            .iter()
            .map(|c| &c.vars)
            .chain(std::iter::once(&self.objective))
        {
            let mut member = vec![false; self.num_vars];
            for &j in vars {
                member[j] = true;
            }
            for (sig, m) in signature.iter_mut().zip(member) {
                sig.push(m);
            }
        }
        let mut classes: std::collections::HashMap<&Vec<bool>, usize> = Default::default();
        let mut class_of = Vec::with_capacity(self.num_vars);
        for sig in &signature {
            let next = classes.len();
            class_of.push(*classes.entry(sig).or_insert(next));
        }
        let remap = |vars: &[usize]| {
            let mut out: Vec<usize> = vars.iter().map(|&j| class_of[j]).collect();
            out.sort_unstable();
            out.dedup();
            out
        };
        LinearProgram {
            num_vars: classes.len(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    vars: remap(&c.vars),
                    relation: c.relation,
                    rhs: c.rhs.clone(),
                })
                .collect(),
            objective: remap(&self.objective),
        }
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs of the current objective.
    cost: Vec<Rational>,
    /// Objective value, negated: `-(c_B · x_B)`.
    neg_value: Rational,
    /// Columns `>= artificial_start` are artificial.
    artificial_start: usize,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = Rational::one() / &self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        self.rhs[row] *= &inv;
        let nonzero: Vec<usize> = (0..self.width)
            .filter(|&j| !self.rows[row][j].is_zero())
            .collect();
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                self.rows[r][j] -= delta;
            }
            self.rhs[r] -= &factor * &pivot_rhs;
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                self.cost[j] -= delta;
            }
            self.neg_value -= &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Installs `costs` as the objective to minimize, pricing out the basis.
    fn set_objective(&mut self, costs: Vec<Rational>) {
        self.cost = costs;
        self.neg_value = Rational::zero();
        for r in 0..self.rows.len() {
            let cb = self.cost[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.width {
                if !self.rows[r][j].is_zero() {
                    let delta = &cb * &self.rows[r][j];
                    self.cost[j] -= delta;
                }
            }
            self.neg_value -= &cb * &self.rhs[r];
        }
    }

    /// Minimizes the installed objective. Entering column: lowest index with
    /// negative reduced cost. Leaving row: minimum ratio, ties broken by
    /// lowest basic variable index.
    fn optimize(&mut self, allow_artificial: bool) -> bool {
        let limit = if allow_artificial {
            self.width
        } else {
            self.artificial_start
        };
        loop {
            let Some(col) = (0..limit).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    fn value(&self) -> Rational {
        -self.neg_value.clone()
    }
}

/// Exact optimum of `lp` in the given direction.
pub fn lp_solve(lp: &LinearProgram, direction: Direction) -> LpOutcome {
    let m = lp.constraints.len();
    let n = lp.num_vars;

    // Normalize to non-negative right-hand sides.
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = lp
        .constraints
        .iter()
        .map(|c| {
            let mut coeffs = vec![Rational::zero(); n];
            for &j in &c.vars {
                coeffs[j] += Rational::one();
            }
            if c.rhs.is_negative() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (
                    coeffs.into_iter().map(|v| -v).collect(),
                    flipped,
                    -c.rhs.clone(),
                )
            } else {
                (coeffs, c.relation, c.rhs.clone())
            }
        })
        .collect();

    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let artificial_start = n + slacks;
    let width = artificial_start + artificials;

    let mut basis = Vec::with_capacity(m);
    let mut next_slack = n;
    let mut next_art = artificial_start;
    for (coeffs, relation, _) in rows.iter_mut() {
        coeffs.resize(width, Rational::zero());
        match relation {
            Relation::Le => {
                coeffs[next_slack] = Rational::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                coeffs[next_slack] = -Rational::one();
                next_slack += 1;
                coeffs[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                coeffs[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
    }

    let (rows, rhs): (Vec<_>, Vec<_>) = rows.into_iter().map(|(c, _, b)| (c, b)).unzip();
    let mut t = Tableau {
        rows,
        rhs,
        basis,
        cost: vec![Rational::zero(); width],
        neg_value: Rational::zero(),
        artificial_start,
        width,
    };

    if artificials > 0 {
        let mut phase_one = vec![Rational::zero(); width];
        for c in phase_one.iter_mut().skip(artificial_start) {
            *c = Rational::one();
        }
        t.set_objective(phase_one);
        t.optimize(true);
        if t.value().is_positive() {
            return LpOutcome::Infeasible;
        }
        // Pivot remaining (zero-level) artificials out of the basis; rows
        // where that is impossible are redundant and dropped.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] < artificial_start {
                r += 1;
                continue;
            }
            match (0..artificial_start).find(|&j| !t.rows[r][j].is_zero()) {
                Some(col) => {
                    t.pivot(r, col);
                    r += 1;
                }
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                }
            }
        }
    }

    let sign = match direction {
        Direction::Min => Rational::one(),
        Direction::Max => -Rational::one(),
    };
    let mut costs = vec![Rational::zero(); width];
    for &j in &lp.objective {
        costs[j] += &sign;
    }
    t.set_objective(costs);
    if !t.optimize(false) {
        return LpOutcome::Unbounded;
    }
    LpOutcome::Optimal(t.value() * sign)
}
