mod common;

use common::leaf_depths;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slp_core::gen::random_weighted_string;
use slp_core::{build_prefix_sslp, build_suffix_sslp, SuffixSslp, WeightedString};

fn ceil_log2(w: u64) -> f64 {
    if w <= 1 {
        0.0
    } else {
        (64 - (w - 1).leading_zeros()) as f64
    }
}

/// Checks structure, every derived word, and both depth bounds; `ranges[i]`
/// is the position range variable `i` must derive.
fn check(ws: &WeightedString, s: &SuffixSslp, ranges: impl Fn(usize) -> std::ops::Range<usize>) {
    let n = ws.len();
    let g = &s.grammar;
    assert!(g.var_count() <= 3 * n, "{} variables for {n} letters", g.var_count());
    assert!(g.rules.iter().all(|r| r.len() <= 4));
    for i in 0..n {
        let range = ranges(i);
        assert_eq!(s.expand_letters(s.vars[i]).unwrap(), ws.letters[range.clone()].to_vec());
        let total: u64 = ws.weights[range].iter().sum();
        for (pos, depth) in leaf_depths(g, s.vars[i]) {
            let w = ws.weights[pos as usize] as f64;
            let d = depth as f64;
            assert!(d <= 3.0 + 2.0 * (total as f64).log2() - 2.0 * w.log2() + 1e-9, "variable {i}, leaf {pos}: depth {d}");
            assert!(d <= 1.0 + 2.0 * (ceil_log2(total) - w.log2()) + 1e-9, "variable {i}, leaf {pos}: depth {d}");
        }
    }
}

#[test]
fn small_cases() {
    for w in [1, 5, 1 << 40] {
        let ws = WeightedString::new(vec![3], vec![w]);
        let s = build_suffix_sslp(&ws).unwrap();
        assert_eq!(s.grammar.var_count(), 1);
        check(&ws, &s, |i| i..1);
        let p = build_prefix_sslp(&ws).unwrap();
        check(&ws, &p, |i| 0..i + 1);
    }
    let ws = WeightedString::new((0..7).collect(), vec![1; 7]);
    let s = build_suffix_sslp(&ws).unwrap();
    assert!(s.grammar.var_count() <= 21);
    check(&ws, &s, |i| i..7);

    let ws = WeightedString::new((0..9).collect(), vec![1, 1, 1, 1, 1, 1, 1, 1, 55]);
    check(&ws, &build_suffix_sslp(&ws).unwrap(), |i| i..9);
    check(&ws, &build_prefix_sslp(&ws).unwrap(), |i| 0..i + 1);
}

#[test]
fn repeated_letters() {
    let ws = WeightedString::new(vec![0, 0, 1, 0, 0, 1], vec![2, 3, 1, 4, 1, 1]);
    check(&ws, &build_suffix_sslp(&ws).unwrap(), |i| i..6);
}

#[test]
fn random_strings() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..120 {
        let n = rng.random_range(1..=200);
        let max_w = if rng.random_bool(0.5) { 1 << 40 } else { rng.random_range(1..=16) };
        let ws = random_weighted_string(n, 10, max_w, &mut rng);
        check(&ws, &build_suffix_sslp(&ws).unwrap(), |i| i..n);
        check(&ws, &build_prefix_sslp(&ws).unwrap(), |i| 0..i + 1);
    }
}
