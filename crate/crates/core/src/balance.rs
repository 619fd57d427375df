//! Rebalancing string grammars to logarithmic derivation depth.

use crate::error::{Error, Result};
use crate::query::grammar_fingerprint;
use crate::scd::{decompose, MultiDag};
use crate::sslp::{Sslp, Symbol};
use crate::wsuffix::{build_prefix_sslp, build_suffix_sslp, SuffixSslp, WeightedString};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceReport {
    pub input_size: u64,
    pub cnf_size: u64,
    pub output_size: u64,
    pub input_max_path: u64,
    pub output_max_path: u64,
    pub n: u64,
    /// `output_size / cnf_size`.
    pub size_ratio: f64,
    /// `output_max_path - 6 log2 n`.
    pub depth_slack: f64,
}

/// Embeds a suffix/prefix grammar into `rules`, mapping position `j` to `slots[j]`.
/// Returns, per suffix variable, the symbol that derives it in `rules`.
fn embed(s: &SuffixSslp, slots: &[u32], rules: &mut Vec<Vec<Symbol>>) -> Vec<Symbol> {
    let g = &s.grammar;
    let mut map: Vec<Symbol> = vec![Symbol::Terminal(u32::MAX); g.var_count()];
    let tr = |sym: Symbol, map: &[Symbol]| match sym {
        Symbol::Terminal(p) => Symbol::Variable(slots[p as usize]),
        Symbol::Variable(v) => map[v as usize],
    };
    // the builder creates children before parents
    for (v, rhs) in g.rules.iter().enumerate() {
        map[v] = if rhs.len() == 1 {
            tr(rhs[0], &map)
        } else {
            rules.push(rhs.iter().map(|&x| tr(x, &map)).collect());
            Symbol::Variable(rules.len() as u32 - 1)
        };
    }
    s.vars.iter().map(|&v| map[v as usize]).collect()
}

/// Balances `g`. Output rules have length at most 4 and the output derives the same string.
///
/// The input is converted to normal form first; surviving variables of that form keep
/// their relative order and new variables follow them.
pub fn balance(g: &Sslp) -> Result<(Sslp, BalanceReport)> {
    let input_max_path = g.max_path()?;
    let cnf = g.to_cnf()?;
    let len = cnf.lengths()?;
    let n = len[cnf.start as usize];
    let edges: Vec<Vec<u32>> = cnf
        .rules
        .iter()
        .map(|r| {
            r.iter()
                .filter_map(|s| match *s {
                    Symbol::Variable(y) => Some(y),
                    Symbol::Terminal(_) => None,
                })
                .collect()
        })
        .collect();
    let dag = MultiDag::new(edges, cnf.start)?;
    let scd = decompose(&dag)?;
    let mut rules = cnf.rules.clone();
    for path in &scd.paths {
        let p = path.len();
        if p == 0 {
            continue;
        }
        let bottom = path.nodes[p];
        // left siblings top-down, right siblings bottom-up, with their levels
        let mut left: Vec<(usize, u32)> = Vec::new();
        let mut right: Vec<(usize, u32)> = Vec::new();
        for i in 0..p {
            let kids = dag.edges(path.nodes[i]);
            if path.slots[i] == 1 {
                left.push((i, kids[0]));
            } else {
                right.push((i, kids[1]));
            }
        }
        right.reverse();
        let weighted = |side: &[(usize, u32)]| {
            WeightedString::new(side.iter().map(|&(_, v)| v).collect(), side.iter().map(|&(_, v)| len[v as usize]).collect())
        };
        let left_vars: Vec<u32> = left.iter().map(|&(_, v)| v).collect();
        let right_vars: Vec<u32> = right.iter().map(|&(_, v)| v).collect();
        let sufs =
            if left.is_empty() { Vec::new() } else { embed(&build_suffix_sslp(&weighted(&left))?, &left_vars, &mut rules) };
        let pres =
            if right.is_empty() { Vec::new() } else { embed(&build_prefix_sslp(&weighted(&right))?, &right_vars, &mut rules) };
        let mut li = 0; // left entries with level < i
        let mut rk = right.len(); // right entries with level >= i
        for i in 0..p {
            let mut rhs = Vec::with_capacity(3);
            if li < sufs.len() {
                rhs.push(sufs[li]);
            }
            rhs.push(Symbol::Variable(bottom));
            if rk > 0 {
                rhs.push(pres[rk - 1]);
            }
            rules[path.nodes[i] as usize] = rhs;
            if path.slots[i] == 1 {
                li += 1;
            } else {
                rk -= 1;
            }
        }
    }
    let h = Sslp { alphabet_size: cnf.alphabet_size, rules, start: cnf.start };
    let (h, _) = h.gc()?;
    let output_max_path = h.max_path()?;
    let report = BalanceReport {
        input_size: g.size(),
        cnf_size: cnf.size(),
        output_size: h.size(),
        input_max_path,
        output_max_path,
        n,
        size_ratio: h.size() as f64 / cnf.size() as f64,
        depth_slack: output_max_path as f64 - 6.0 * (n as f64).log2(),
    };
    Ok((h, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    /// Lengths plus fingerprints modulo three random primes; equality is probabilistic.
    Fingerprint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub equal: bool,
    pub method: Method,
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for a in WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Compares expansions when both fit in `cap`, otherwise lengths and fingerprints.
pub fn verify_equivalence(g: &Sslp, h: &Sslp, cap: u64) -> Result<Equivalence> {
    let (lg, lh) = (g.len(), h.len());
    let fits = matches!((&lg, &lh), (Ok(a), Ok(b)) if *a <= cap && *b <= cap);
    if fits {
        let equal = g.expand(cap)? == h.expand(cap)?;
        return Ok(Equivalence { equal, method: Method::Exact });
    }
    match (lg, lh) {
        (Ok(a), Ok(b)) if a != b => return Ok(Equivalence { equal: false, method: Method::Exact }),
        (Err(Error::LengthOverflow), _) | (_, Err(Error::LengthOverflow)) => return Err(Error::LengthOverflow),
        (Err(e), _) | (_, Err(e)) => return Err(e),
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    for _ in 0..3 {
        let q = loop {
            let c = rng.random_range((1u64 << 60)..(1u64 << 61)) | 1;
            if is_prime(c) {
                break c;
            }
        };
        let b = rng.random_range(256..q - 1);
        if grammar_fingerprint(g, b, q)? != grammar_fingerprint(h, b, q)? {
            return Ok(Equivalence { equal: false, method: Method::Fingerprint });
        }
    }
    Ok(Equivalence { equal: true, method: Method::Fingerprint })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Symbol::{Terminal as T, Variable as V};

    #[test]
    fn single_terminal() {
        let g = Sslp::new(1, vec![vec![T(0)]], 0);
        let (h, r) = balance(&g).unwrap();
        assert_eq!(h, g);
        assert_eq!(r.output_max_path, 1);
    }

    #[test]
    fn left_comb() {
        // X_0 -> A, X_i -> X_{i-1} A for a string of 1024 letters
        let mut rules = vec![vec![T(0)]];
        rules.push(vec![V(0)]);
        for i in 2..=1024u32 {
            rules.push(vec![V(i - 1), V(0)]);
        }
        let g = Sslp::new(1, rules, 1024);
        let (h, r) = balance(&g).unwrap();
        assert_eq!(h.expand(2000).unwrap(), vec![0; 1024]);
        assert!(r.input_max_path >= 1024);
        assert!(r.output_max_path as f64 <= 6.0 * 10.0 + 12.0, "{r:?}");
    }

    #[test]
    fn primes() {
        assert!(is_prime((1 << 61) - 1));
        assert!(is_prime(97));
        assert!(!is_prime(561));
        assert!(!is_prime(1));
        assert!(!is_prime(((1u64 << 31) - 1) * 3));
    }

    #[test]
    fn verify_detects_flip() {
        let g = Sslp::new(2, vec![vec![V(1), V(1), T(0)], vec![T(0), T(1)]], 0);
        let mut h = g.clone();
        h.rules[0][2] = T(1);
        assert!(verify_equivalence(&g, &g, 100).unwrap().equal);
        assert!(!verify_equivalence(&g, &h, 100).unwrap().equal);
        let e = verify_equivalence(&g, &h, 2).unwrap();
        assert_eq!(e, Equivalence { equal: false, method: Method::Fingerprint });
        assert_eq!(verify_equivalence(&g, &g, 2).unwrap(), Equivalence { equal: true, method: Method::Fingerprint });
    }
}
