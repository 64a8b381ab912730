#![allow(dead_code)]

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use plog_core::formula::{and, atom, implies, not, or};
use plog_core::interval::rational;
use plog_core::{Formula, KnowledgeBase, ProbInterval, Rational, Sentence, World};
use proptest::prelude::*;

pub const ATOMS: [&str; 4] = ["A", "B", "C", "D"];

/// Closed interval with endpoints on a grid of denominator at most 10.
pub fn arb_interval() -> impl Strategy<Value = ProbInterval> {
    (1i64..=10)
        .prop_flat_map(|den| (Just(den), 0..=den, 0..=den))
        .prop_map(|(den, a, b)| ProbInterval::ratio((a.min(b), den), (a.max(b), den)))
}

pub fn arb_formula(atoms: &'static [&'static str], depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = proptest::sample::select(atoms).prop_map(atom);
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| implies(a, b)),
        ]
    })
}

pub fn arb_kb(
    atoms: &'static [&'static str],
    depth: u32,
    max_sentences: usize,
) -> impl Strategy<Value = KnowledgeBase> {
    proptest::collection::vec(
        (arb_formula(atoms, depth), arb_interval()),
        0..=max_sentences,
    )
    .prop_map(|pairs| {
        KnowledgeBase::new(
            pairs
                .into_iter()
                .map(|(f, i)| Sentence::new(f, i))
                .collect(),
        )
    })
}

/// Truth-table enumeration over `atoms` using `Formula::evaluate`.
pub fn truth_table(f: &Formula, atoms: &[String]) -> Vec<bool> {
    (0..1usize << atoms.len())
        .map(|mask| {
            let w: World = atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), mask >> i & 1 == 1))
                .collect();
            f.evaluate(&w).unwrap()
        })
        .collect()
}

/// Solves `a x = b` exactly; `None` if singular.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Rational::one() / a[col][col].clone();
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in col..n {
                    let d = &factor * &a[col][j];
                    a[r][j] -= d;
                }
                let d = &factor * &b[col];
                b[r] -= d;
            }
        }
    }
    Some(b)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Least entailed interval by enumerating every vertex of the feasible
/// polytope of world distributions. Only practical for two or three atoms.
pub fn vertex_oracle(kb: &KnowledgeBase, target: &Formula) -> ProbInterval {
    let mut names: BTreeSet<String> = kb.atoms().clone();
    names.extend(target.atoms());
    let atoms: Vec<String> = names.into_iter().collect();
    let n = 1usize << atoms.len();

    // Each row: coefficients, lower, upper (a·x within [lower, upper]).
    let indicator = |f: &Formula| -> Vec<Rational> {
        truth_table(f, &atoms)
            .into_iter()
            .map(|b| if b { Rational::one() } else { Rational::zero() })
            .collect()
    };
    let mut rows: Vec<(Vec<Rational>, Rational, Rational)> =
        vec![(vec![Rational::one(); n], Rational::one(), Rational::one())];
    for s in kb.sentences() {
        let Some((lo, hi)) = s.interval.bounds() else {
            return ProbInterval::Empty;
        };
        rows.push((indicator(&s.formula), lo.clone(), hi.clone()));
    }
    for j in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[j] = Rational::one();
        rows.push((e, Rational::zero(), Rational::one()));
    }
    // Candidate tight planes: (row, which side).
    let planes: Vec<(usize, bool)> = (0..rows.len())
        .flat_map(|r| {
            if rows[r].1 == rows[r].2 {
                vec![(r, false)]
            } else {
                vec![(r, false), (r, true)]
            }
        })
        .collect();
    let objective = indicator(target);
    let dot =
        |a: &[Rational], x: &[Rational]| -> Rational { a.iter().zip(x).map(|(p, q)| p * q).sum() };

    let mut best: Option<(Rational, Rational)> = None;
    for subset in subsets(planes.len(), n) {
        let a: Vec<Vec<Rational>> = subset
            .iter()
            .map(|&p| rows[planes[p].0].0.clone())
            .collect();
        let b: Vec<Rational> = subset
            .iter()
            .map(|&p| {
                let (r, upper) = planes[p];
                if upper {
                    rows[r].2.clone()
                } else {
                    rows[r].1.clone()
                }
            })
            .collect();
        let Some(x) = solve(a, b) else { continue };
        let feasible = rows.iter().all(|(a, lo, hi)| {
            let v = dot(a, &x);
            *lo <= v && v <= *hi
        });
        if !feasible {
            continue;
        }
        let v = dot(&objective, &x);
        best = Some(match best {
            None => (v.clone(), v),
            Some((lo, hi)) => (lo.min(v.clone()), hi.max(v)),
        });
    }
    match best {
        None => ProbInterval::Empty,
        Some((lo, hi)) => ProbInterval::new(lo, hi).unwrap(),
    }
}

pub fn r(n: i64, d: i64) -> Rational {
    rational(n, d)
}
