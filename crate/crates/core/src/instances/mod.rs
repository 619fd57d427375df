//! Concrete signatures, algebras and subsumption bases.

pub mod cluster;
pub mod forest;
pub mod monoid;
pub mod semiring;

use crate::error::Result;
use crate::sslp::text::{keyed, perr};
use std::fmt::Write;

fn valid_letter(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || "(),*_".contains(c))
}

pub(crate) fn write_alphabet(header: &str, letters: &[String], s: &mut String) {
    writeln!(s, "{header}").unwrap();
    writeln!(s, "alphabet {}", letters.len()).unwrap();
    for (i, l) in letters.iter().enumerate() {
        writeln!(s, "letter {i} {l}").unwrap();
    }
}

/// Reads `alphabet k` and `k` letter lines starting at line index `at`.
pub(crate) fn parse_alphabet(ls: &[&str], at: usize) -> Result<(Vec<String>, usize)> {
    let k: usize = keyed(ls, at, "alphabet")?;
    let mut letters = Vec::with_capacity(k.min(1 << 16));
    for i in 0..k {
        let lno = at + 2 + i;
        let l = ls.get(lno - 1).ok_or_else(|| perr(lno, "missing `letter` line"))?;
        let mut toks = l.splitn(3, ' ');
        let ok = toks.next() == Some("letter") && toks.next() == Some(i.to_string().as_str());
        match toks.next() {
            Some(name) if ok && valid_letter(name) => letters.push(name.to_string()),
            _ => return Err(perr(lno, format!("expected `letter {i} <name>`"))),
        }
    }
    if letters.iter().collect::<std::collections::HashSet<_>>().len() != letters.len() {
        return Err(perr(at + 1, "duplicate letter name"));
    }
    Ok((letters, at + 1 + k))
}

/// Default names `l0, l1, ...`.
pub fn default_letters(k: u32) -> Vec<String> {
    (0..k).map(|i| format!("l{i}")).collect()
}
