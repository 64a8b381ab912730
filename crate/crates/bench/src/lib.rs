//! Fixture knowledge bases shared by the benchmarks.

use plog_core::{parse_kb, KnowledgeBase};

pub const WORKED_EXAMPLE: &str = "\
P(A & B -> C) in [0.8, 0.9]
P(A) in [0.7, 0.8]
P(B) in [0.8, 1]
P(D -> C) in [0.7, 0.8]
P(D) in [0.5, 0.7]
";

/// Ten atoms, eight sentences.
pub const DESK: &str = "\
P(A1 & A2 -> A3) in [0.8, 0.95]
P(A1) in [0.6, 0.9]
P(A2) in [0.5, 0.8]
P(A3 -> A4 | A5) in [0.7, 1]
P(A6 & !A7) in [0.1, 0.4]
P(A8 | A9) in [0.3, 0.9]
P(A9 -> A10) in [0.6, 0.8]
P(A4 & A10 -> A6) in [0.5, 0.9]
";

/// A chain `P(Xi -> Xi+1)` of `n` implications over `n + 1` atoms, with the
/// first atom pinned.
pub fn chain(n: usize) -> String {
    let mut text = String::from("P(X0) in [0.9, 1]\n");
    for i in 0..n {
        text.push_str(&format!("P(X{i} -> X{}) in [0.8, 0.95]\n", i + 1));
    }
    text
}

pub fn kb(text: &str) -> KnowledgeBase {
    parse_kb(text).expect("fixture parses")
}
