//! Random and adversarial inputs for tests and benchmarks.

use crate::algebra::{GammaSlp, Term};
use crate::instances::semiring::{constant, semiring_signature, ADD, MUL};
use crate::scd::MultiDag;
use crate::sslp::{Sslp, Symbol};
use crate::wsuffix::WeightedString;
use rand::Rng;
use std::sync::Arc;

/// A grammar over `alphabet` terminals with `vars` variables, right-hand sides
/// of length `1..=max_rhs`, deriving at most `max_len` letters.
///
/// Variables lean towards recently defined ones so the result is deep and
/// repetitive. The start is the last variable; some variables may be unreachable.
pub fn random_sslp<R: Rng>(alphabet: u32, vars: usize, max_rhs: usize, max_len: u64, rng: &mut R) -> Sslp {
    let alphabet = alphabet.max(1);
    let mut rules: Vec<Vec<Symbol>> = Vec::with_capacity(vars.max(1));
    let mut lens: Vec<u64> = Vec::with_capacity(vars.max(1));
    for i in 0..vars.max(1) {
        let width = rng.random_range(1..=max_rhs.max(1));
        let mut rhs = Vec::with_capacity(width);
        let mut len = 0u64;
        for _ in 0..width {
            let mut sym = Symbol::Terminal(rng.random_range(0..alphabet));
            if i > 0 && rng.random_bool(0.75) {
                let y = if rng.random_bool(0.7) { i - 1 - rng.random_range(0..i.min(6)) } else { rng.random_range(0..i) };
                if len + lens[y] <= max_len {
                    sym = Symbol::Variable(y as u32);
                }
            }
            let add = match sym {
                Symbol::Terminal(_) => 1,
                Symbol::Variable(y) => lens[y as usize],
            };
            if len + add > max_len && len > 0 {
                break;
            }
            len += add;
            rhs.push(sym);
        }
        rules.push(rhs);
        lens.push(len);
    }
    let start = rules.len() as u32 - 1;
    Sslp::new(alphabet, rules, start)
}

/// `t0^n` as a left comb `X_i -> X_{i-1} A`, the deepest normal-form grammar for it.
pub fn left_comb(n: u32) -> Sslp {
    comb(n, false)
}

/// `t0^n` as a right comb `X_i -> A X_{i-1}`.
pub fn right_comb(n: u32) -> Sslp {
    comb(n, true)
}

fn comb(n: u32, right: bool) -> Sslp {
    let n = n.max(1);
    let mut rules = vec![vec![Symbol::Terminal(0)]];
    for i in 1..n {
        let (x, a) = (Symbol::Variable(i - 1), Symbol::Variable(0));
        rules.push(if right { vec![a, x] } else { vec![x, a] });
    }
    Sslp::new(1, rules, n - 1)
}

/// A comb over a random text: `X_i -> X_{i-1} a_i`, a grammar with one
/// variable per letter and maximal depth.
pub fn text_comb(text: &[u32], alphabet: u32) -> Sslp {
    let mut rules = vec![vec![Symbol::Terminal(text[0])]];
    for (i, &a) in text.iter().enumerate().skip(1) {
        rules.push(vec![Symbol::Variable(i as u32 - 1), Symbol::Terminal(a)]);
    }
    let start = rules.len() as u32 - 1;
    Sslp::new(alphabet, rules, start)
}

/// The Fibonacci word of order `k`, `F_k -> F_{k-1} F_{k-2}`.
pub fn fibonacci(k: u32) -> Sslp {
    let mut rules = vec![vec![Symbol::Terminal(1)], vec![Symbol::Terminal(0)]];
    for i in 2..=k.max(1) {
        rules.push(vec![Symbol::Variable(i - 1), Symbol::Variable(i - 2)]);
    }
    let start = rules.len() as u32 - 1;
    Sslp::new(2, rules, start)
}

/// A rooted DAG with at most `nodes` nodes, every node reachable, out-degree
/// at most `max_out` and at most `max_paths` root-to-sink paths.
pub fn random_dag<R: Rng>(nodes: usize, max_out: usize, max_paths: u64, rng: &mut R) -> MultiDag {
    // children have smaller ids; the last node is the root
    let nodes = nodes.max(1);
    let mut kids: Vec<Vec<u32>> = Vec::with_capacity(nodes);
    let mut down: Vec<u64> = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let mut out = Vec::new();
        let mut paths = 0u64;
        if i > 0 {
            let deg = rng.random_range(0..=max_out.max(1));
            for _ in 0..deg {
                let y = if rng.random_bool(0.7) { i - 1 - rng.random_range(0..i.min(5)) } else { rng.random_range(0..i) };
                if paths + down[y] <= max_paths {
                    paths += down[y];
                    out.push(y as u32);
                }
            }
        }
        down.push(paths.max(1));
        kids.push(out);
    }
    // keep what the root reaches, renumbered so the root is 0
    let root = nodes - 1;
    let mut id = vec![u32::MAX; nodes];
    let mut order = vec![root];
    id[root] = 0;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &v in &kids[u] {
            if id[v as usize] == u32::MAX {
                id[v as usize] = order.len() as u32;
                order.push(v as usize);
            }
        }
    }
    let edges = order.iter().map(|&u| kids[u].iter().map(|&v| id[v as usize]).collect()).collect();
    MultiDag::new(edges, 0).expect("acyclic and rooted")
}

/// `n` letters over `alphabet` with weights in `1..=max_weight`.
pub fn random_weighted_string<R: Rng>(n: usize, alphabet: u32, max_weight: u64, rng: &mut R) -> WeightedString {
    let letters = (0..n).map(|_| rng.random_range(0..alphabet.max(1))).collect();
    let weights = (0..n)
        .map(|_| {
            // log-uniform so small and large weights both show up
            let bits = rng.random_range(0..=63 - max_weight.max(1).leading_zeros());
            rng.random_range(1..=(1u64 << bits).min(max_weight.max(1)))
        })
        .collect();
    WeightedString::new(letters, weights)
}

/// A circuit over `+`, `*` and `constants` constants with about `vars` gates
/// whose unfolding has at most `max_unfolded` nodes.
pub fn random_semiring_circuit<R: Rng>(constants: u32, vars: usize, max_unfolded: u64, rng: &mut R) -> GammaSlp {
    let constants = constants.max(1);
    let mut rules: Vec<Term<u32>> = (0..constants).map(|i| Term::constant(constant(i))).collect();
    let mut size: Vec<u64> = vec![1; constants as usize];
    let target = vars.max(constants as usize + 1);
    let mut tries = 0;
    while rules.len() < target && tries < 20 * target {
        tries += 1;
        let m = rules.len();
        let mut pick = || if rng.random_bool(0.7) { m - 1 - rng.random_range(0..m.min(4)) } else { rng.random_range(0..m) };
        let (y, z) = (pick(), pick());
        let s = size[y] + size[z] + 1;
        if s > max_unfolded {
            continue;
        }
        let f = if rng.random_bool(0.5) { ADD } else { MUL };
        rules.push(Term::app(f, vec![Term::Leaf(y as u32), Term::Leaf(z as u32)]));
        size.push(s);
    }
    let start = (0..rules.len()).max_by_key(|&x| (size[x], x)).unwrap() as u32;
    let g = GammaSlp::infer(Arc::new(semiring_signature(constants)), rules, start).expect("well formed");
    g.gc().expect("acyclic").0
}

/// `x_0 = c0`, `x_i = x_{i-1} * c1 + c0`: a circuit whose depth equals its size.
pub fn semiring_comb(steps: u32) -> GammaSlp {
    let mut rules = vec![Term::constant(constant(0)), Term::constant(constant(1))];
    let mut prev = 0;
    for _ in 0..steps {
        let prod = Term::app(MUL, vec![Term::Leaf(prev), Term::Leaf(1)]);
        rules.push(Term::app(ADD, vec![prod, Term::Leaf(0)]));
        prev = rules.len() as u32 - 1;
    }
    GammaSlp::infer(Arc::new(semiring_signature(2)), rules, prev).expect("well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = random_sslp(4, 40, 5, 10_000, &mut rng);
            g.validate().unwrap();
            assert!(g.len().unwrap() <= 10_000);
            let d = random_dag(200, 3, 1 << 40, &mut rng);
            assert!(crate::scd::leaf_path_counts(&d).unwrap().1 <= 1 << 40);
            let c = random_semiring_circuit(3, 200, 1 << 40, &mut rng);
            assert!(c.unfolded_size().unwrap() <= 1 << 40);
        }
        assert_eq!(left_comb(10).expand(100).unwrap(), vec![0; 10]);
        assert_eq!(right_comb(10).max_path().unwrap(), 10);
        assert_eq!(fibonacci(6).len().unwrap(), 13);
        assert_eq!(text_comb(&[2, 0, 1], 3).expand(10).unwrap(), vec![2, 0, 1]);
        assert_eq!(semiring_comb(5).max_path().unwrap(), 10);
    }
}
