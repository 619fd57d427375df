use super::access::{AccessIndex, Node};
use crate::error::{Error, Result};
use crate::sslp::Sslp;

/// Range minimum over a string whose terminals carry integer values.
#[derive(Clone, Debug)]
pub struct RmqIndex {
    ix: AccessIndex,
    values: Vec<i64>,
    /// per variable: minimum value and the 0-based offset of its leftmost occurrence
    min: Vec<(i64, u64)>,
}

/// `(value, position)`; smaller value wins, ties go to the smaller position.
fn better(a: (i64, u64), b: (i64, u64)) -> (i64, u64) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

impl RmqIndex {
    /// `values[a]` is the value of terminal `a`.
    pub fn new(g: &Sslp, values: Vec<i64>) -> Result<Self> {
        if values.len() < g.alphabet_size as usize {
            return Err(Error::Invalid(format!("{} values given for an alphabet of {}", values.len(), g.alphabet_size)));
        }
        let ix = AccessIndex::new(g)?;
        let mut min = vec![(0i64, 0u64); ix.nodes.len()];
        for &x in &ix.order {
            min[x as usize] = match ix.nodes[x as usize] {
                Node::Leaf(a) => (values[a as usize], 0),
                Node::Pair(y, z) => {
                    let (my, oy) = min[y as usize];
                    let (mz, oz) = min[z as usize];
                    if mz < my {
                        (mz, ix.len[y as usize] + oz)
                    } else {
                        (my, oy)
                    }
                }
            };
        }
        Ok(RmqIndex { ix, values, min })
    }

    /// Each terminal's value is its code.
    pub fn identity(g: &Sslp) -> Result<Self> {
        Self::new(g, (0..i64::from(g.alphabet_size)).collect())
    }

    pub fn len(&self) -> u64 {
        self.ix.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value_of(&self, a: u32) -> i64 {
        self.values[a as usize]
    }

    fn whole(&self, x: u32, off: u64) -> (i64, u64) {
        let (v, o) = self.min[x as usize];
        (v, off + o + 1)
    }

    /// Minimum of the suffix of `x` starting at its local position `i`.
    fn suffix(&self, mut x: u32, mut i: u64, mut off: u64, visits: &mut usize) -> (i64, u64) {
        let mut best: Option<(i64, u64)> = None;
        loop {
            *visits += 1;
            if i == 1 {
                let w = self.whole(x, off);
                return best.map_or(w, |b| better(w, b));
            }
            match self.ix.nodes[x as usize] {
                Node::Leaf(_) => unreachable!("i is 1 at a leaf"),
                Node::Pair(y, z) => {
                    let ly = self.ix.len[y as usize];
                    if i > ly {
                        i -= ly;
                        off += ly;
                        x = z;
                    } else {
                        let w = self.whole(z, off + ly);
                        best = Some(best.map_or(w, |b| better(w, b)));
                        x = y;
                    }
                }
            }
        }
    }

    /// Minimum of the prefix of `x` ending at its local position `j`.
    fn prefix(&self, mut x: u32, mut j: u64, mut off: u64, visits: &mut usize) -> (i64, u64) {
        let mut best: Option<(i64, u64)> = None;
        loop {
            *visits += 1;
            if j == self.ix.len[x as usize] {
                let w = self.whole(x, off);
                return best.map_or(w, |b| better(b, w));
            }
            match self.ix.nodes[x as usize] {
                Node::Leaf(_) => unreachable!("j covers the leaf"),
                Node::Pair(y, z) => {
                    let ly = self.ix.len[y as usize];
                    if j <= ly {
                        x = y;
                    } else {
                        let w = self.whole(y, off);
                        best = Some(best.map_or(w, |b| better(b, w)));
                        j -= ly;
                        off += ly;
                        x = z;
                    }
                }
            }
        }
    }

    /// `(position, value)` of the leftmost minimum in `s[i..=j]`.
    pub fn rmq(&self, i: u64, j: u64) -> Result<(u64, i64)> {
        self.rmq_counted(i, j).map(|r| r.0)
    }

    pub fn rmq_counted(&self, i: u64, j: u64) -> Result<((u64, i64), usize)> {
        self.ix.check_pos(i)?;
        self.ix.check_pos(j)?;
        if i > j {
            return Err(Error::OutOfRange { pos: i, len: j });
        }
        let (mut x, mut i, mut j, mut off, mut visits) = (self.ix.root, i, j, 0u64, 0usize);
        let (v, p) = loop {
            visits += 1;
            if i == 1 && j == self.ix.len[x as usize] {
                break self.whole(x, off);
            }
            match self.ix.nodes[x as usize] {
                Node::Leaf(_) => unreachable!("a leaf range is always whole"),
                Node::Pair(y, z) => {
                    let ly = self.ix.len[y as usize];
                    if j <= ly {
                        x = y;
                    } else if i > ly {
                        i -= ly;
                        j -= ly;
                        off += ly;
                        x = z;
                    } else {
                        let left = self.suffix(y, i, off, &mut visits);
                        let right = self.prefix(z, j - ly, off + ly, &mut visits);
                        break better(left, right);
                    }
                }
            }
        };
        Ok(((p, v), visits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sslp::Symbol::Terminal as T;

    #[test]
    fn five_values() {
        // 5,3,8,3,9 as five distinct terminals
        let g = Sslp::new(5, vec![vec![T(0), T(1), T(2), T(3), T(4)]], 0);
        let r = RmqIndex::new(&g, vec![5, 3, 8, 3, 9]).unwrap();
        assert_eq!(r.rmq(2, 5).unwrap(), (2, 3));
        assert_eq!(r.rmq(3, 5).unwrap(), (4, 3));
        assert_eq!(r.rmq(1, 5).unwrap(), (2, 3));
        assert_eq!(r.rmq(5, 5).unwrap(), (5, 9));
        assert!(r.rmq(0, 2).is_err());
        assert!(r.rmq(3, 2).is_err());
    }
}
