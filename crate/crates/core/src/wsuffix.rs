//! Weight-balanced grammars deriving every suffix (or prefix) of a weighted string.
//!
//! Terminal `j` of the produced grammar stands for position `j` of the input,
//! so repeated letters are told apart; `letters` maps positions back.

use crate::error::{Error, Result};
use crate::sslp::{ceil_log2, Sslp, Symbol, MAX_LEN};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedString {
    pub letters: Vec<u32>,
    pub weights: Vec<u64>,
}

impl WeightedString {
    pub fn new(letters: Vec<u32>, weights: Vec<u64>) -> Self {
        WeightedString { letters, weights }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn check(&self) -> Result<u64> {
        if self.letters.is_empty() {
            return Err(Error::EmptyInput);
        }
        if self.letters.len() != self.weights.len() {
            return Err(Error::Invalid("letters and weights differ in length".into()));
        }
        let mut total: u64 = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0 {
                return Err(Error::ZeroWeight(i));
            }
            total = total.checked_add(w).filter(|&t| t < MAX_LEN).ok_or(Error::WeightOverflow)?;
        }
        Ok(total)
    }
}

#[derive(Clone, Debug)]
pub struct SuffixSslp {
    /// Over the alphabet of positions `0..n`.
    pub grammar: Sslp,
    /// `vars[i]` derives positions `i..n` (suffixes) or `0..=i` (prefixes).
    pub vars: Vec<u32>,
    pub letters: Vec<u32>,
}

impl SuffixSslp {
    /// The derived string with positions mapped back to letters.
    pub fn expand_letters(&self, var: u32) -> Result<Vec<u32>> {
        Ok(self.grammar.expand_var(var, u64::MAX)?.into_iter().map(|p| self.letters[p as usize]).collect())
    }
}

/// `ceil(log2 w)`, with `-1` standing in for `log2 0`.
fn rl(w: u64) -> i32 {
    if w == 0 {
        -1
    } else {
        ceil_log2(w) as i32
    }
}

struct Builder {
    rules: Vec<Vec<Symbol>>,
}

impl Builder {
    fn var(&mut self, rhs: Vec<Symbol>) -> Symbol {
        self.rules.push(rhs);
        Symbol::Variable(self.rules.len() as u32 - 1)
    }

    /// Returns one variable per suffix of `s`.
    #[allow(clippy::needless_range_loop)]
    fn suffixes(&mut self, s: &[Symbol], w: &[u64], total: u64) -> Vec<Symbol> {
        let n = s.len();
        if n == 1 {
            return vec![self.var(vec![s[0]])];
        }
        let top = rl(total);
        let mut acc = 0u64;
        let mut i = 0;
        loop {
            acc += w[i];
            if top > rl(total - acc) {
                break;
            }
            i += 1;
        }
        // s = a[..i] c b[i+1..]
        let c = s[i];
        let vb = if i + 1 < n { self.suffixes(&s[i + 1..], &w[i + 1..], total - acc) } else { Vec::new() };
        let v1 = vb.first().copied();
        let mut tail = vec![c];
        tail.extend(v1);
        let v0 = self.var(tail.clone());
        let k = i;
        let mut out = Vec::with_capacity(n);
        if k > 0 {
            let blocks = k.div_ceil(2);
            let mut xs = Vec::with_capacity(blocks);
            let mut xw = Vec::with_capacity(blocks);
            for j in 0..k / 2 {
                xs.push(self.var(vec![s[2 * j], s[2 * j + 1]]));
                xw.push(w[2 * j] + w[2 * j + 1]);
            }
            if k % 2 == 1 {
                xs.push(s[k - 1]);
                xw.push(w[k - 1]);
            }
            let us = self.suffixes(&xs, &xw, acc - w[i]);
            for p in 0..k {
                let mut rhs = Vec::with_capacity(4);
                if p % 2 == 1 {
                    rhs.push(s[p]);
                }
                if let Some(&u) = us.get(p.div_ceil(2)) {
                    rhs.push(u);
                }
                rhs.extend_from_slice(&tail);
                out.push(self.var(rhs));
            }
        }
        out.push(v0);
        out.extend(vb);
        out
    }
}

pub fn build_suffix_sslp(ws: &WeightedString) -> Result<SuffixSslp> {
    let total = ws.check()?;
    let n = ws.len();
    let syms: Vec<Symbol> = (0..n as u32).map(Symbol::Terminal).collect();
    let mut b = Builder { rules: Vec::with_capacity(3 * n) };
    let vars: Vec<u32> = b
        .suffixes(&syms, &ws.weights, total)
        .into_iter()
        .map(|s| match s {
            Symbol::Variable(v) => v,
            Symbol::Terminal(_) => unreachable!("suffixes are always variables"),
        })
        .collect();
    let grammar = Sslp { alphabet_size: n as u32, rules: b.rules, start: vars[0] };
    Ok(SuffixSslp { grammar, vars, letters: ws.letters.clone() })
}

/// Prefix variables via the suffix construction on the reversed string.
pub fn build_prefix_sslp(ws: &WeightedString) -> Result<SuffixSslp> {
    let n = ws.len();
    let rev = WeightedString {
        letters: ws.letters.iter().rev().copied().collect(),
        weights: ws.weights.iter().rev().copied().collect(),
    };
    let mut s = build_suffix_sslp(&rev)?;
    for rhs in &mut s.grammar.rules {
        rhs.reverse();
        for sym in rhs.iter_mut() {
            if let Symbol::Terminal(p) = sym {
                *p = n as u32 - 1 - *p;
            }
        }
    }
    s.vars.reverse();
    s.grammar.start = s.vars[n - 1];
    s.letters = ws.letters.clone();
    Ok(s)
}
