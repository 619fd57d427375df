use super::access::{AccessIndex, Node};
use crate::error::{Error, Result};
use crate::sslp::Sslp;
use std::collections::BTreeMap;

/// Presence bitsets for successor queries, plus occurrence counts for the
/// terminals that rank/select will be asked about.
#[derive(Clone, Debug)]
pub struct OccIndex {
    ix: AccessIndex,
    words: usize,
    bits: Vec<u64>,
    counts: BTreeMap<u32, Vec<u64>>,
}

impl OccIndex {
    /// Presence bitsets only; rank and select fail with `CountsNotBuilt`.
    pub fn new(g: &Sslp) -> Result<Self> {
        Self::with_counts(g, &[])
    }

    /// Count tables for every terminal of the alphabet (`m * sigma` words).
    pub fn with_all_counts(g: &Sslp) -> Result<Self> {
        let all: Vec<u32> = (0..g.alphabet_size).collect();
        Self::with_counts(g, &all)
    }

    pub fn with_counts(g: &Sslp, terminals: &[u32]) -> Result<Self> {
        Self::from_access(AccessIndex::new(g)?, terminals)
    }

    pub fn from_access(ix: AccessIndex, terminals: &[u32]) -> Result<Self> {
        let words = (ix.alphabet_size as usize).div_ceil(64);
        let m = ix.nodes.len();
        let mut bits = vec![0u64; m * words];
        for &x in &ix.order {
            let x = x as usize;
            match ix.nodes[x] {
                Node::Leaf(a) => bits[x * words + a as usize / 64] |= 1 << (a % 64),
                Node::Pair(y, z) => {
                    for w in 0..words {
                        bits[x * words + w] = bits[y as usize * words + w] | bits[z as usize * words + w];
                    }
                }
            }
        }
        let mut counts = BTreeMap::new();
        for &a in terminals {
            if a >= ix.alphabet_size {
                return Err(Error::UnknownTerminal(a));
            }
            let mut c = vec![0u64; m];
            for &x in &ix.order {
                c[x as usize] = match ix.nodes[x as usize] {
                    Node::Leaf(b) => u64::from(a == b),
                    Node::Pair(y, z) => c[y as usize] + c[z as usize],
                };
            }
            counts.insert(a, c);
        }
        Ok(OccIndex { ix, words, bits, counts })
    }

    pub fn access_index(&self) -> &AccessIndex {
        &self.ix
    }

    pub fn len(&self) -> u64 {
        self.ix.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn has(&self, x: u32, a: u32) -> bool {
        self.bits[x as usize * self.words + a as usize / 64] >> (a % 64) & 1 == 1
    }

    fn known(&self, a: u32) -> Result<()> {
        if a >= self.ix.alphabet_size {
            Err(Error::UnknownTerminal(a))
        } else {
            Ok(())
        }
    }

    fn counts_for(&self, a: u32) -> Result<&[u64]> {
        self.known(a)?;
        self.counts.get(&a).map(|c| c.as_slice()).ok_or(Error::CountsNotBuilt(a))
    }

    /// Occurrences of `a` in positions `1..=i`.
    pub fn rank(&self, a: u32, i: u64) -> Result<u64> {
        self.rank_counted(a, i).map(|r| r.0)
    }

    pub fn rank_counted(&self, a: u32, i: u64) -> Result<(u64, usize)> {
        let c = self.counts_for(a)?;
        if i == 0 {
            return Ok((0, 0));
        }
        self.ix.check_pos(i)?;
        let (mut x, mut p, mut acc, mut visits) = (self.ix.root, i, 0u64, 1);
        loop {
            match self.ix.nodes[x as usize] {
                Node::Leaf(b) => return Ok((acc + u64::from(a == b), visits)),
                Node::Pair(y, z) => {
                    let ly = self.ix.len[y as usize];
                    if p <= ly {
                        x = y;
                    } else {
                        p -= ly;
                        acc += c[y as usize];
                        x = z;
                    }
                    visits += 1;
                }
            }
        }
    }

    /// Position of the `k`-th occurrence of `a`.
    pub fn select(&self, a: u32, k: u64) -> Result<u64> {
        self.select_counted(a, k).map(|r| r.0)
    }

    pub fn select_counted(&self, a: u32, k: u64) -> Result<(u64, usize)> {
        let c = self.counts_for(a)?;
        if k == 0 || c[self.ix.root as usize] < k {
            return Err(Error::NotFound);
        }
        let (mut x, mut k, mut off, mut visits) = (self.ix.root, k, 0u64, 1);
        loop {
            match self.ix.nodes[x as usize] {
                Node::Leaf(_) => return Ok((off + 1, visits)),
                Node::Pair(y, z) => {
                    let cy = c[y as usize];
                    if k <= cy {
                        x = y;
                    } else {
                        k -= cy;
                        off += self.ix.len[y as usize];
                        x = z;
                    }
                    visits += 1;
                }
            }
        }
    }

    /// Leftmost (or rightmost) position of `a` inside `x`, given `x` starts after `off`.
    fn extreme(&self, mut x: u32, mut off: u64, a: u32, leftmost: bool, visits: &mut usize) -> u64 {
        loop {
            match self.ix.nodes[x as usize] {
                Node::Leaf(_) => return off + 1,
                Node::Pair(y, z) => {
                    let go_left = if leftmost { self.has(y, a) } else { !self.has(z, a) };
                    if go_left {
                        x = y;
                    } else {
                        off += self.ix.len[y as usize];
                        x = z;
                    }
                    *visits += 1;
                }
            }
        }
    }

    /// Smallest `j > i` with `s[j] = a`.
    pub fn successor(&self, i: u64, a: u32) -> Result<u64> {
        self.successor_counted(i, a).map(|r| r.0)
    }

    pub fn successor_counted(&self, i: u64, a: u32) -> Result<(u64, usize)> {
        self.known(a)?;
        let n = self.len();
        if i > n {
            return Err(Error::OutOfRange { pos: i, len: n });
        }
        if i == n || !self.has(self.ix.root, a) {
            return Err(Error::NotFound);
        }
        let (mut x, mut p, mut off, mut visits) = (self.ix.root, i + 1, 0u64, 1);
        // deepest right sibling containing a, with its offset
        let mut cand = None;
        loop {
            match self.ix.nodes[x as usize] {
                Node::Leaf(b) => {
                    if b == a {
                        return Ok((off + 1, visits));
                    }
                    break;
                }
                Node::Pair(y, z) => {
                    let ly = self.ix.len[y as usize];
                    if p <= ly {
                        if self.has(z, a) {
                            cand = Some((z, off + ly));
                        }
                        x = y;
                    } else {
                        p -= ly;
                        off += ly;
                        x = z;
                    }
                    visits += 1;
                }
            }
        }
        let (z, zoff) = cand.ok_or(Error::NotFound)?;
        visits += 1;
        let j = self.extreme(z, zoff, a, true, &mut visits);
        Ok((j, visits))
    }

    /// Largest `j < i` with `s[j] = a`; `i` ranges over `1..=n+1`.
    pub fn predecessor(&self, i: u64, a: u32) -> Result<u64> {
        self.predecessor_counted(i, a).map(|r| r.0)
    }

    pub fn predecessor_counted(&self, i: u64, a: u32) -> Result<(u64, usize)> {
        self.known(a)?;
        let n = self.len();
        if i == 0 || i > n + 1 {
            return Err(Error::OutOfRange { pos: i, len: n });
        }
        if i == 1 || !self.has(self.ix.root, a) {
            return Err(Error::NotFound);
        }
        let (mut x, mut p, mut off, mut visits) = (self.ix.root, i - 1, 0u64, 1);
        let mut cand = None;
        loop {
            match self.ix.nodes[x as usize] {
                Node::Leaf(b) => {
                    if b == a {
                        return Ok((off + 1, visits));
                    }
                    break;
                }
                Node::Pair(y, z) => {
                    let ly = self.ix.len[y as usize];
                    if p <= ly {
                        x = y;
                    } else {
                        if self.has(y, a) {
                            cand = Some((y, off));
                        }
                        p -= ly;
                        off += ly;
                        x = z;
                    }
                    visits += 1;
                }
            }
        }
        let (y, yoff) = cand.ok_or(Error::NotFound)?;
        visits += 1;
        let j = self.extreme(y, yoff, a, false, &mut visits);
        Ok((j, visits))
    }

    /// All minimal windows `(i, j)` (1-based, inclusive) containing `pattern`
    /// as a subsequence, ascending by `i`.
    pub fn minimal_subsequence_occurrences(&self, pattern: &[u32]) -> Result<Vec<(u64, u64)>> {
        if pattern.is_empty() {
            return Err(Error::EmptyInput);
        }
        for &a in pattern {
            self.known(a)?;
        }
        let ok = |r: Result<u64>| match r {
            Ok(j) => Ok(Some(j)),
            Err(Error::NotFound) => Ok(None),
            Err(e) => Err(e),
        };
        let mut out = Vec::new();
        let mut from = 0u64;
        'scan: loop {
            let mut end = from;
            for &a in pattern {
                match ok(self.successor(end, a))? {
                    Some(j) => end = j,
                    None => break 'scan,
                }
            }
            let mut start = end;
            for &a in pattern[..pattern.len() - 1].iter().rev() {
                start = ok(self.predecessor(start, a))?.expect("forward match exists");
            }
            out.push((start, end));
            from = start;
        }
        Ok(out)
    }
}
