use super::access::{AccessIndex, Node};
use crate::balance::{is_prime, mul_mod as mul, pow_mod};
use crate::error::{Error, Result};
use crate::sslp::{Sslp, Symbol};

pub const MERSENNE_61: u64 = (1 << 61) - 1;

fn check_params(base: u64, modulus: u64) -> Result<()> {
    if modulus >= 1 << 61 || !is_prime(modulus) {
        return Err(Error::Domain(format!("modulus {modulus} is not a prime below 2^61")));
    }
    if base == 0 || base >= modulus {
        return Err(Error::Domain(format!("base {base} outside 1..{modulus}")));
    }
    Ok(())
}

/// Fingerprint of the whole derived string, folding rules of any width.
pub fn grammar_fingerprint(g: &Sslp, base: u64, modulus: u64) -> Result<u64> {
    check_params(base, modulus)?;
    let q = modulus;
    let order = g.reachable_order()?;
    let mut fp = vec![(0u64, 1u64); g.rules.len()];
    for x in order {
        let mut acc = (0u64, 1u64);
        for s in &g.rules[x as usize] {
            let (f, p) = match *s {
                Symbol::Terminal(a) => ((u64::from(a) + 1) % q, base),
                Symbol::Variable(y) => fp[y as usize],
            };
            acc = ((mul(acc.0, p, q) + f) % q, mul(acc.1, p, q));
        }
        fp[x as usize] = acc;
    }
    Ok(fp[g.start as usize].0)
}

/// Karp-Rabin fingerprints of arbitrary factors: `phi(s) = sum (s_k + 1) b^(|s| - k) mod q`.
#[derive(Clone, Debug)]
pub struct FingerprintIndex {
    ix: AccessIndex,
    base: u64,
    modulus: u64,
    /// `(phi(val X), b^|X|)`
    fp: Vec<(u64, u64)>,
}

impl FingerprintIndex {
    pub fn new(g: &Sslp, base: u64) -> Result<Self> {
        Self::with_modulus(g, base, MERSENNE_61)
    }

    pub fn with_modulus(g: &Sslp, base: u64, modulus: u64) -> Result<Self> {
        check_params(base, modulus)?;
        let ix = AccessIndex::new(g)?;
        let q = modulus;
        let mut fp = vec![(0u64, 1u64); ix.nodes.len()];
        for &x in &ix.order {
            fp[x as usize] = match ix.nodes[x as usize] {
                Node::Leaf(a) => ((u64::from(a) + 1) % q, base),
                Node::Pair(y, z) => {
                    let (fy, py) = fp[y as usize];
                    let (fz, pz) = fp[z as usize];
                    ((mul(fy, pz, q) + fz) % q, mul(py, pz, q))
                }
            };
        }
        Ok(FingerprintIndex { ix, base, modulus, fp })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> u64 {
        self.ix.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Checks the concatenation identity on every rule.
    pub fn check(&self) -> bool {
        let q = self.modulus;
        self.ix.order.iter().all(|&x| match self.ix.nodes[x as usize] {
            Node::Leaf(_) => true,
            Node::Pair(y, z) => {
                let (fy, py) = self.fp[y as usize];
                let (fz, pz) = self.fp[z as usize];
                self.fp[x as usize] == ((mul(fy, pz, q) + fz) % q, mul(py, pz, q))
            }
        })
    }

    /// `(phi(s[1..=p]), b^p)`
    fn prefix(&self, p: u64, visits: &mut usize) -> (u64, u64) {
        let q = self.modulus;
        let mut acc = (0u64, 1u64);
        if p == 0 {
            return acc;
        }
        let (mut x, mut p) = (self.ix.root, p);
        *visits += 1;
        loop {
            if p == self.ix.len[x as usize] {
                let (f, pw) = self.fp[x as usize];
                return ((mul(acc.0, pw, q) + f) % q, mul(acc.1, pw, q));
            }
            match self.ix.nodes[x as usize] {
                Node::Leaf(_) => unreachable!("p is within the leaf"),
                Node::Pair(y, z) => {
                    let ly = self.ix.len[y as usize];
                    if p <= ly {
                        x = y;
                    } else {
                        let (f, pw) = self.fp[y as usize];
                        acc = ((mul(acc.0, pw, q) + f) % q, mul(acc.1, pw, q));
                        p -= ly;
                        x = z;
                    }
                    *visits += 1;
                }
            }
        }
    }

    pub fn fingerprint(&self, i: u64, j: u64) -> Result<u64> {
        self.fingerprint_counted(i, j).map(|r| r.0)
    }

    /// `phi(s[i..=j])`, 1-based inclusive.
    pub fn fingerprint_counted(&self, i: u64, j: u64) -> Result<(u64, usize)> {
        self.ix.check_pos(i)?;
        self.ix.check_pos(j)?;
        if i > j {
            return Err(Error::OutOfRange { pos: i, len: j });
        }
        let q = self.modulus;
        let mut visits = 0;
        let (fj, _) = self.prefix(j, &mut visits);
        let (fi, _) = self.prefix(i - 1, &mut visits);
        let pw = pow_mod(self.base, j - i + 1, q);
        Ok(((fj + q - mul(fi, pw, q)) % q, visits))
    }

    /// Direct Horner evaluation, for checking.
    pub fn hash_slice(&self, s: &[u32]) -> u64 {
        hash_slice(s, self.base, self.modulus)
    }
}

pub(crate) fn hash_slice(s: &[u32], base: u64, q: u64) -> u64 {
    s.iter().fold(0u64, |h, &a| (mul(h, base, q) + (u64::from(a) + 1) % q) % q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Symbol::{Terminal as T, Variable as V};

    #[test]
    fn rejects_bad_modulus() {
        let g = Sslp::new(1, vec![vec![T(0)]], 0);
        assert!(FingerprintIndex::with_modulus(&g, 3, 100).is_err());
        assert!(FingerprintIndex::with_modulus(&g, 0, 101).is_err());
        assert!(FingerprintIndex::with_modulus(&g, 3, 101).is_ok());
    }

    #[test]
    fn single_letter_is_code_plus_one() {
        let g = Sslp::new(4, vec![vec![V(1), V(1)], vec![T(3), T(0)]], 0);
        let f = FingerprintIndex::new(&g, 1000).unwrap();
        assert!(f.check());
        assert_eq!(f.fingerprint(1, 1).unwrap(), 4);
        assert_eq!(f.fingerprint(2, 2).unwrap(), 1);
        let s = g.expand(10).unwrap();
        assert_eq!(f.fingerprint(1, 4).unwrap(), f.hash_slice(&s));
        assert_eq!(grammar_fingerprint(&g, 1000, MERSENNE_61).unwrap(), f.hash_slice(&s));
        assert_eq!(f.fingerprint(2, 3).unwrap(), f.hash_slice(&s[1..3]));
    }
}
