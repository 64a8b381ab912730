//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use plog_core::engine::{self, BeliefState};
use plog_core::formula::{and, atom, implies, not, or};
use plog_core::interval::rational;
use plog_core::oracle::{entailed_interval, is_consistent, DEFAULT_ATOM_CAP};
use plog_core::rules::{
    conjunction_rule, disjunction_rule, horn_rule, implication_rule, negation_rule,
};
use plog_core::{
    parse_formula, parse_kb, EngineLimits, Formula, KnowledgeBase, ProbInterval, Rational, RuleId,
    Sentence, World,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

const EXAMPLE: &str = "\
P(A & B -> C) in [0.8, 0.9]
P(A) in [0.7, 0.8]
P(B) in [0.8, 1]
P(D -> C) in [0.7, 0.8]
P(D) in [0.5, 0.7]
";

const DISJOINT: &str = "\
P(A) in [0.3, 0.3]
P(B) in [0.4, 0.4]
P(A & B) in [0, 0]
";

const CLASH: &str = "\
P(A) in [0.8, 0.9]
P(!A) in [0.8, 0.9]
";

const DESK: &str = "\
P(A1 & A2 -> A3) in [0.8, 0.95]
P(A1) in [0.6, 0.9]
P(A2) in [0.5, 0.8]
P(A3 -> A4 | A5) in [0.7, 1]
P(A6 & !A7) in [0.1, 0.4]
P(A8 | A9) in [0.3, 0.9]
P(A9 -> A10) in [0.6, 0.8]
P(A4 & A10 -> A6) in [0.5, 0.9]
";

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn iv(lo: (i64, i64), hi: (i64, i64)) -> ProbInterval {
    ProbInterval::ratio(lo, hi)
}

fn exact(kb: &KnowledgeBase, target: &Formula) -> ProbInterval {
    entailed_interval(kb, target, DEFAULT_ATOM_CAP).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("{what} took {elapsed:?}, limit {limit:?}")
    })
}

// ---------------------------------------------------------------- generators

const ATOMS: [&str; 4] = ["A", "B", "C", "D"];

fn rand_formula(rng: &mut ChaCha8Rng, atoms: &[&str], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return atom(atoms.choose(rng).unwrap());
    }
    match rng.gen_range(0..4) {
        0 => not(rand_formula(rng, atoms, depth - 1)),
        1 => and(
            rand_formula(rng, atoms, depth - 1),
            rand_formula(rng, atoms, depth - 1),
        ),
        2 => or(
            rand_formula(rng, atoms, depth - 1),
            rand_formula(rng, atoms, depth - 1),
        ),
        _ => implies(
            rand_formula(rng, atoms, depth - 1),
            rand_formula(rng, atoms, depth - 1),
        ),
    }
}

fn rand_interval(rng: &mut ChaCha8Rng) -> ProbInterval {
    let den = rng.gen_range(1..=10);
    let a = rng.gen_range(0..=den);
    let b = rng.gen_range(0..=den);
    iv((a.min(b), den), (a.max(b), den))
}

/// Probability mass in tenths over the 2^n worlds of `atoms`.
fn rand_distribution(rng: &mut ChaCha8Rng, atoms: &[&str]) -> Vec<(World, i64)> {
    let n = 1usize << atoms.len();
    let mut weights = vec![0i64; n];
    for _ in 0..10 {
        weights[rng.gen_range(0..n)] += 1;
    }
    (0..n)
        .map(|mask| {
            let w: World = atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (a.to_string(), mask >> i & 1 == 1))
                .collect();
            (w, weights[mask])
        })
        .collect()
}

/// Probability of `f` in tenths. Atoms missing from the worlds read false.
fn prob_tenths(dist: &[(World, i64)], f: &Formula) -> i64 {
    dist.iter()
        .filter(|(w, _)| {
            f.evaluate_with(&|a: &str| Some(w.get(a).unwrap_or(false)))
                .unwrap()
        })
        .map(|(_, p)| p)
        .sum()
}

/// A KB with a witness distribution: each interval contains the formula's
/// probability under it.
fn rand_consistent_kb(rng: &mut ChaCha8Rng, atoms: &[&str]) -> KnowledgeBase {
    let dist = rand_distribution(rng, atoms);
    let n = rng.gen_range(1..=5);
    let sentences = (0..n)
        .map(|_| {
            let phi = rand_formula(rng, atoms, 2);
            let p = prob_tenths(&dist, &phi);
            let lo = p - rng.gen_range(0..=3).min(p);
            let hi = p + rng.gen_range(0..=3).min(10 - p);
            Sentence::new(phi, iv((lo, 10), (hi, 10)))
        })
        .collect();
    KnowledgeBase::new(sentences)
}

fn rand_kb(rng: &mut ChaCha8Rng, atoms: &[&str]) -> KnowledgeBase {
    let n = rng.gen_range(0..=5);
    let sentences = (0..n)
        .map(|_| Sentence::new(rand_formula(rng, atoms, 2), rand_interval(rng)))
        .collect();
    KnowledgeBase::new(sentences)
}

fn suite_kbs() -> Vec<(KnowledgeBase, Formula)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    (0..500)
        .map(|i| {
            let k = rng.gen_range(1..=4);
            let atoms = &ATOMS[..k];
            let kb = if i % 2 == 0 {
                rand_consistent_kb(&mut rng, atoms)
            } else {
                rand_kb(&mut rng, atoms)
            };
            let target = rand_formula(&mut rng, atoms, 2);
            (kb, target)
        })
        .collect()
}

// ---------------------------------------------------------------- criteria

fn worked_example_rules() -> Outcome {
    let kb = parse_kb(EXAMPLE).unwrap();
    let c = f("C");
    let start = Instant::now();
    let result = engine::run(&kb, &c, &EngineLimits::default());
    let elapsed = start.elapsed();
    ensure(result.interval == iv((3, 10), (4, 5)), || {
        format!("rules gave {}", result.interval)
    })?;
    ensure(result.converged, || "did not converge".into())?;
    let concludes = |rule: RuleId, want: &ProbInterval| {
        result
            .trace
            .iter()
            .any(|s| s.rule == rule && s.conclusion.formula == c && s.conclusion.interval == *want)
    };
    ensure(concludes(RuleId::Horn, &iv((3, 10), (9, 10))), || {
        "no horn step concluding [3/10, 9/10]".into()
    })?;
    ensure(concludes(RuleId::Implication, &iv((1, 5), (4, 5))), || {
        "no implication step concluding [1/5, 4/5]".into()
    })?;
    ensure(
        concludes(RuleId::MultipleDerivation, &iv((3, 10), (4, 5))),
        || "no multiple-derivation merge".into(),
    )?;
    within(elapsed, Duration::from_secs(1), "rules run")?;
    Ok(format!(
        "[3/10, 4/5] with horn, implication and merge in {elapsed:.2?}"
    ))
}

fn worked_example_exact() -> Outcome {
    let kb = parse_kb(EXAMPLE).unwrap();
    let start = Instant::now();
    let got = exact(&kb, &f("C"));
    let elapsed = start.elapsed();
    ensure(got == iv((3, 10), (4, 5)), || format!("oracle gave {got}"))?;
    within(elapsed, Duration::from_secs(1), "oracle")?;
    Ok(format!("[3/10, 4/5] in {elapsed:.2?}"))
}

fn soundness(kbs: &[(KnowledgeBase, Formula)]) -> Outcome {
    let start = Instant::now();
    let mut checks = 0usize;
    let mut violations = Vec::new();
    for (n, (kb, target)) in kbs.iter().enumerate() {
        let mut state = BeliefState::new(kb, target);
        let mut cache: BTreeMap<Formula, ProbInterval> = BTreeMap::new();
        loop {
            for g in state.formulas() {
                let want = cache.entry(g.clone()).or_insert_with(|| exact(kb, g));
                let (have, _) = state.snapshot(g);
                checks += 1;
                if !have.contains(want) {
                    violations.push(format!(
                        "kb #{n} round {}: {g} has {have}, exact {want}",
                        state.round()
                    ));
                }
            }
            if state.is_inconsistent() {
                if is_consistent(kb, DEFAULT_ATOM_CAP).unwrap() {
                    violations.push(format!("kb #{n}: engine empty on a consistent kb"));
                }
                break;
            }
            if state.round() >= 100 || !state.saturate_round() {
                break;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(violations.is_empty(), || {
        format!("{} violations, first: {}", violations.len(), violations[0])
    })?;
    within(elapsed, Duration::from_secs(300), "soundness suite")?;
    Ok(format!(
        "{} kbs, {checks} containment checks, 0 violations in {elapsed:.2?}",
        kbs.len()
    ))
}

/// Random literal over `atoms`.
fn literal(rng: &mut ChaCha8Rng, atoms: &[&str]) -> Formula {
    let a = atom(atoms.choose(rng).unwrap());
    if rng.gen_bool(0.5) {
        not(a)
    } else {
        a
    }
}

fn tightness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let (a, b) = (atom("A"), atom("B"));

    for _ in 0..100 {
        let (i1, i2) = (rand_interval(&mut rng), rand_interval(&mut rng));
        let pa = Sentence::new(a.clone(), i1.clone());
        let pb = Sentence::new(b.clone(), i2.clone());

        let neg = negation_rule(&pa).unwrap();
        let want = exact(&KnowledgeBase::new(vec![pa.clone()]), &neg.formula);
        ensure(neg.interval == want, || {
            format!("negation of {i1}: rule {}, exact {want}", neg.interval)
        })?;

        let conj = conjunction_rule(&pa, &pb).unwrap();
        let want = exact(&KnowledgeBase::new(vec![pa, pb]), &conj.formula);
        ensure(conj.interval == want, || {
            format!(
                "conjunction of {i1}, {i2}: rule {}, exact {want}",
                conj.interval
            )
        })?;
    }

    // Sound rules: fresh atoms first, then premises over shared atoms where
    // the dependence lets the oracle do better.
    let mut strict = BTreeMap::from([("implication", 0), ("horn", 0), ("disjunction", 0)]);
    let mut record = |name: &'static str, premises: Vec<Sentence>, out: Sentence| {
        let want = exact(&KnowledgeBase::new(premises), &out.formula);
        if !out.interval.contains(&want) {
            return Err(format!(
                "{name}: rule {} misses exact {want} for {}",
                out.interval, out.formula
            ));
        }
        if !want.is_empty() && out.interval != want {
            *strict.get_mut(name).unwrap() += 1;
        }
        Ok(())
    };
    for round in 0..300 {
        let fresh = round < 100;
        let pool: &[&str] = if fresh {
            &["A", "B", "C", "D"]
        } else {
            &["A", "B"]
        };
        let (p, q, r) = if fresh {
            (atom("A"), atom("B"), atom("C"))
        } else {
            (
                literal(&mut rng, pool),
                literal(&mut rng, pool),
                literal(&mut rng, pool),
            )
        };

        let prem = Sentence::new(p.clone(), rand_interval(&mut rng));
        let imp = Sentence::new(implies(p.clone(), q.clone()), rand_interval(&mut rng));
        let out = implication_rule(&prem, &imp).unwrap();
        record("implication", vec![prem.clone(), imp], out)?;

        let h = if fresh {
            atom("D")
        } else {
            literal(&mut rng, pool)
        };
        let clause = Sentence::new(
            implies(and(p.clone(), q.clone()), h),
            rand_interval(&mut rng),
        );
        let pq = Sentence::new(q.clone(), rand_interval(&mut rng));
        let out = horn_rule(&clause, &[prem.clone(), pq.clone()]).unwrap();
        record("horn", vec![clause, prem.clone(), pq], out)?;

        let pr = Sentence::new(if fresh { q } else { r }, rand_interval(&mut rng));
        let out = disjunction_rule(&prem, &pr).unwrap();
        record("disjunction", vec![prem, pr], out)?;
    }
    for (name, n) in &strict {
        ensure(*n > 0, || format!("{name}: no strict containment instance"))?;
    }
    Ok(format!(
        "negation, conjunction exact on 100 pairs; strict instances: implication {}, horn {}, disjunction {}",
        strict["implication"], strict["horn"], strict["disjunction"]
    ))
}

fn incompleteness() -> Outcome {
    let kb = parse_kb(DISJOINT).unwrap();
    let target = f("A | B");
    let oracle = exact(&kb, &target);
    let rules = engine::run(&kb, &target, &EngineLimits::default()).interval;
    ensure(oracle == iv((7, 10), (7, 10)), || {
        format!("exact gave {oracle}")
    })?;
    ensure(rules.contains(&oracle) && rules != oracle, || {
        format!("rules gave {rules}, not strictly wider than {oracle}")
    })?;
    ensure(rules == iv((2, 5), (7, 10)), || {
        format!("rules gave {rules}, expected [2/5, 7/10]")
    })?;
    Ok(format!("exact {oracle}, rules {rules}"))
}

fn monotonicity(kbs: &[(KnowledgeBase, Formula)]) -> Outcome {
    let limits = EngineLimits {
        snapshot_every: Some(1),
        ..EngineLimits::default()
    };
    let mut pairs = 0usize;
    for (n, (kb, target)) in kbs.iter().enumerate() {
        let result = engine::run(kb, target, &limits);
        ensure(result.snapshots.first().map(|s| s.0) == Some(0), || {
            format!("kb #{n}: no round-0 snapshot")
        })?;
        for w in result.snapshots.windows(2) {
            pairs += 1;
            ensure(w[0].0 < w[1].0 && w[0].1.contains(&w[1].1), || {
                format!(
                    "kb #{n}: round {} {} then round {} {}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )
            })?;
        }
    }
    Ok(format!(
        "{} runs, {pairs} consecutive snapshot pairs nested",
        kbs.len()
    ))
}

/// Every formula over A, B with at most `depth` nested connectives.
fn all_formulas(depth: usize) -> Vec<Formula> {
    let mut levels = vec![vec![atom("A"), atom("B")]];
    for _ in 0..depth {
        let below: Vec<Formula> = levels.iter().flatten().cloned().collect();
        let mut next = Vec::new();
        for x in &below {
            next.push(not(x.clone()));
            for y in &below {
                next.push(and(x.clone(), y.clone()));
                next.push(or(x.clone(), y.clone()));
                next.push(implies(x.clone(), y.clone()));
            }
        }
        next.retain(|g| g.depth() == levels.len());
        levels.push(next);
    }
    levels.into_iter().flatten().collect()
}

fn semantic_properties() -> Outcome {
    let formulas = all_formulas(2);
    let empty = KnowledgeBase::new(Vec::new());
    let two = ["A", "B"];
    let uniform: Vec<(World, i64)> = rand_distribution(&mut ChaCha8Rng::seed_from_u64(0), &two)
        .into_iter()
        .map(|(w, _)| (w, 1))
        .collect();
    let table = |g: &Formula| -> Vec<bool> {
        uniform
            .iter()
            .map(|(w, _)| {
                g.evaluate_with(&|a: &str| Some(w.get(a).unwrap_or(false)))
                    .unwrap()
            })
            .collect()
    };

    let zero = ProbInterval::point(Rational::zero()).unwrap();
    let one = ProbInterval::point(Rational::one()).unwrap();
    let mut by_table: BTreeMap<Vec<bool>, ProbInterval> = BTreeMap::new();
    for g in &formulas {
        let got = exact(&empty, g);
        let tt = table(g);
        if tt.iter().all(|v| *v) {
            ensure(got == one, || format!("valid {g} gave {got}"))?;
        }
        if tt.iter().all(|v| !*v) {
            ensure(got == zero, || format!("inconsistent {g} gave {got}"))?;
        }
        let seen = by_table.entry(tt).or_insert_with(|| got.clone());
        ensure(*seen == got, || {
            format!("{g} gave {got}, an equivalent formula {seen}")
        })?;
        let neg = exact(&empty, &not(g.clone()));
        ensure(neg == got.complement(), || {
            format!("!({g}) gave {neg}, {g} gave {got}")
        })?;
        ensure(
            !got.is_empty() && ProbInterval::unit().contains(&got),
            || format!("{g} gave {got}"),
        )?;
    }

    // Inclusion-exclusion on point-valued KBs.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let pairs = 300;
    for _ in 0..pairs {
        let dist = rand_distribution(&mut rng, &two);
        let x = formulas.choose(&mut rng).unwrap().clone();
        let y = formulas.choose(&mut rng).unwrap().clone();
        let point = |g: &Formula| {
            let p = prob_tenths(&dist, g);
            iv((p, 10), (p, 10))
        };
        let xy = and(x.clone(), y.clone());
        let kb = KnowledgeBase::new(vec![
            Sentence::new(x.clone(), point(&x)),
            Sentence::new(y.clone(), point(&y)),
            Sentence::new(xy.clone(), point(&xy)),
        ]);
        let sum = rational(
            prob_tenths(&dist, &x) + prob_tenths(&dist, &y) - prob_tenths(&dist, &xy),
            10,
        );
        let want = ProbInterval::point(sum).unwrap();
        let got = exact(&kb, &or(x.clone(), y.clone()));
        ensure(got == want, || {
            format!("P({x} | {y}) gave {got}, expected {want}")
        })?;
    }
    Ok(format!(
        "{} formulas, {} equivalence classes, {pairs} inclusion-exclusion checks",
        formulas.len(),
        by_table.len()
    ))
}

fn inconsistency() -> Outcome {
    let kb = parse_kb(CLASH).unwrap();
    let result = engine::run(&kb, &f("A"), &EngineLimits::default());
    ensure(!result.consistent && result.interval.is_empty(), || {
        format!("engine gave {}", result.interval)
    })?;
    ensure(!is_consistent(&kb, DEFAULT_ATOM_CAP).unwrap(), || {
        "oracle found a model".into()
    })?;
    ensure(exact(&kb, &f("A")).is_empty(), || {
        "oracle interval not empty".into()
    })?;

    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/clash.plog");
    let argv = ["plog", "check", "--kb", path.to_str().unwrap()];
    let code = plog_cli::run(argv, &mut Vec::new(), &mut Vec::new());
    ensure(code == plog_cli::EXIT_INCONSISTENT, || {
        format!("cli exited {code}")
    })?;
    Ok("engine empty, LP infeasible, cli exit 2".into())
}

fn desk_scale() -> Outcome {
    let kb = parse_kb(DESK).unwrap();
    ensure(kb.atoms().len() == 10 && kb.len() == 8, || {
        "fixture shape".into()
    })?;
    let target = f("A6 | A3");

    let start = Instant::now();
    let oracle = exact(&kb, &target);
    let t_exact = start.elapsed();
    ensure(!oracle.is_empty(), || "fixture is inconsistent".into())?;

    let start = Instant::now();
    let result = engine::run(&kb, &target, &EngineLimits::default());
    let t_rules = start.elapsed();
    ensure(result.interval.contains(&oracle), || {
        format!("rules {} misses exact {oracle}", result.interval)
    })?;

    within(t_exact, Duration::from_secs(10), "exact mode")?;
    within(t_rules, Duration::from_secs(1), "rules mode")?;
    Ok(format!(
        "exact {oracle} in {t_exact:.2?}; rules {} after {} rounds in {t_rules:.2?}",
        result.interval, result.rounds_used
    ))
}

fn main() -> ExitCode {
    let kbs = suite_kbs();
    let criteria: Vec<(&str, Check)> = vec![
        ("worked example, rules", Box::new(worked_example_rules)),
        ("worked example, exact", Box::new(worked_example_exact)),
        ("soundness on random kbs", Box::new(|| soundness(&kbs))),
        ("rule tightness", Box::new(tightness)),
        ("incompleteness witness", Box::new(incompleteness)),
        ("snapshot monotonicity", Box::new(|| monotonicity(&kbs))),
        ("semantic properties", Box::new(semantic_properties)),
        ("inconsistency detection", Box::new(inconsistency)),
        ("desk-scale performance", Box::new(desk_scale)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS  {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL  {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
