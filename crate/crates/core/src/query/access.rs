use crate::error::{Error, Result};
use crate::sslp::{Sslp, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Node {
    Leaf(u32),
    Pair(u32, u32),
}

#[derive(Clone, Debug)]
pub struct AccessIndex {
    pub(crate) nodes: Vec<Node>,
    pub(crate) len: Vec<u64>,
    pub(crate) root: u32,
    pub(crate) alphabet_size: u32,
    /// children before parents
    pub(crate) order: Vec<u32>,
}

impl AccessIndex {
    pub fn new(g: &Sslp) -> Result<Self> {
        let cnf = if g.is_cnf() { g.gc()?.0 } else { g.to_cnf()? };
        let len = cnf.lengths()?;
        let order = cnf.reachable_order()?;
        let nodes = cnf
            .rules
            .iter()
            .map(|r| match r.as_slice() {
                [Symbol::Terminal(a)] => Node::Leaf(*a),
                [Symbol::Variable(y), Symbol::Variable(z)] => Node::Pair(*y, *z),
                _ => unreachable!("normal form"),
            })
            .collect();
        Ok(AccessIndex { nodes, len, root: cnf.start, alphabet_size: cnf.alphabet_size, order })
    }

    /// Length of the derived string.
    pub fn len(&self) -> u64 {
        self.len[self.root as usize]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn var_count(&self) -> usize {
        self.nodes.len()
    }

    /// Longest root-to-leaf chain of the binary grammar, in variables.
    pub fn max_path(&self) -> u64 {
        let mut mp = vec![0u64; self.nodes.len()];
        for &x in &self.order {
            mp[x as usize] = match self.nodes[x as usize] {
                Node::Leaf(_) => 1,
                Node::Pair(y, z) => 1 + mp[y as usize].max(mp[z as usize]),
            };
        }
        mp[self.root as usize]
    }

    pub(crate) fn check_pos(&self, p: u64) -> Result<()> {
        if p == 0 || p > self.len() {
            Err(Error::OutOfRange { pos: p, len: self.len() })
        } else {
            Ok(())
        }
    }

    pub fn access(&self, p: u64) -> Result<u32> {
        self.access_counted(p).map(|(a, _)| a)
    }

    /// The terminal at 1-based position `p` and the number of variables visited.
    pub fn access_counted(&self, p: u64) -> Result<(u32, usize)> {
        self.check_pos(p)?;
        let mut x = self.root;
        let mut p = p;
        let mut visits = 1;
        loop {
            match self.nodes[x as usize] {
                Node::Leaf(a) => return Ok((a, visits)),
                Node::Pair(y, z) => {
                    let ly = self.len[y as usize];
                    if p <= ly {
                        x = y;
                    } else {
                        p -= ly;
                        x = z;
                    }
                    visits += 1;
                }
            }
        }
    }
}
