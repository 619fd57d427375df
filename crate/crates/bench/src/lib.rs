//! Input generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slp_core::gen::{left_comb, random_sslp, text_comb};
use slp_core::{balance, Sslp};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Grammars deriving strings of roughly `n` letters, labelled for reports.
pub fn inputs(n: u64) -> Vec<(&'static str, Sslp)> {
    let mut r = rng(n);
    let text: Vec<u32> = (0..n).map(|_| r.random_range(0..4)).collect();
    vec![("left_comb", left_comb(n as u32)), ("text_comb", text_comb(&text, 4)), ("random", random_sslp(4, 300, 4, n, &mut r))]
}

pub fn balanced(g: &Sslp) -> Sslp {
    balance(g).expect("generated grammars balance").0
}

/// `count` positions in `1..=len`.
pub fn positions(len: u64, count: usize, seed: u64) -> Vec<u64> {
    let mut r = rng(seed);
    (0..count).map(|_| r.random_range(1..=len)).collect()
}
