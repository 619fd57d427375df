//! String straight-line programs.

mod binary;
pub(crate) mod text;

pub use binary::{from_binary, to_binary, BINARY_MAGIC};
pub use text::{parse_text, write_text};

use crate::error::{Error, Result};

/// Lengths at or above this bound are refused.
pub const MAX_LEN: u64 = 1 << 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Terminal(u32),
    Variable(u32),
}

/// A grammar deriving exactly one string. `rules[x]` is the right-hand side of variable `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sslp {
    pub alphabet_size: u32,
    pub rules: Vec<Vec<Symbol>>,
    pub start: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SslpStats {
    pub size: u64,
    /// Longest variable chain times `ceil(log2 r)` for the widest rule `r`.
    pub depth: u64,
    pub max_path: u64,
    /// `None` when the length overflows.
    pub length: Option<u64>,
}

pub(crate) fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

impl Sslp {
    pub fn new(alphabet_size: u32, rules: Vec<Vec<Symbol>>, start: u32) -> Self {
        Sslp { alphabet_size, rules, start }
    }

    pub fn var_count(&self) -> usize {
        self.rules.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.topo_order().map(|_| ())
    }

    /// All variables, children before parents. Fails on cycles and bad references.
    pub fn topo_order(&self) -> Result<Vec<u32>> {
        let m = self.rules.len();
        if m == 0 {
            return Err(Error::Invalid("grammar has no variables".into()));
        }
        if self.alphabet_size == 0 {
            return Err(Error::Invalid("alphabet is empty".into()));
        }
        if self.start as usize >= m {
            return Err(Error::DanglingReference { var: self.start, what: "start variable undefined".into() });
        }
        for (x, rhs) in self.rules.iter().enumerate() {
            for s in rhs {
                match *s {
                    Symbol::Terminal(a) if a >= self.alphabet_size => {
                        return Err(Error::DanglingReference { var: x as u32, what: format!("terminal t{a} outside alphabet") })
                    }
                    Symbol::Variable(y) if y as usize >= m => {
                        return Err(Error::DanglingReference { var: x as u32, what: format!("variable v{y} undefined") })
                    }
                    _ => {}
                }
            }
        }
        // 0 = unseen, 1 = on stack, 2 = done
        let mut color = vec![0u8; m];
        let mut order = Vec::with_capacity(m);
        let mut stack: Vec<(u32, usize)> = Vec::new();
        for root in 0..m as u32 {
            if color[root as usize] != 0 {
                continue;
            }
            color[root as usize] = 1;
            stack.push((root, 0));
            while let Some(top) = stack.last_mut() {
                let (x, i) = *top;
                let rhs = &self.rules[x as usize];
                if i < rhs.len() {
                    top.1 += 1;
                    if let Symbol::Variable(y) = rhs[i] {
                        match color[y as usize] {
                            0 => {
                                color[y as usize] = 1;
                                stack.push((y, 0));
                            }
                            1 => {
                                let from = stack.iter().position(|&(v, _)| v == y).unwrap();
                                let mut cycle: Vec<u32> = stack[from..].iter().map(|&(v, _)| v).collect();
                                cycle.push(y);
                                return Err(Error::CyclicGrammar(cycle));
                            }
                            _ => {}
                        }
                    }
                } else {
                    color[x as usize] = 2;
                    order.push(x);
                    stack.pop();
                }
            }
        }
        Ok(order)
    }

    /// Variables reachable from the start, children before parents.
    pub fn reachable_order(&self) -> Result<Vec<u32>> {
        let order = self.topo_order()?;
        let mut live = vec![false; self.rules.len()];
        live[self.start as usize] = true;
        for &x in order.iter().rev() {
            if live[x as usize] {
                for s in &self.rules[x as usize] {
                    if let Symbol::Variable(y) = *s {
                        live[y as usize] = true;
                    }
                }
            }
        }
        Ok(order.into_iter().filter(|&x| live[x as usize]).collect())
    }

    /// `|val(X)|` for every variable.
    pub fn lengths(&self) -> Result<Vec<u64>> {
        let order = self.topo_order()?;
        let mut len = vec![0u64; self.rules.len()];
        for x in order {
            let mut total: u64 = 0;
            for s in &self.rules[x as usize] {
                let add = match *s {
                    Symbol::Terminal(_) => 1,
                    Symbol::Variable(y) => len[y as usize],
                };
                total = total.checked_add(add).filter(|&t| t < MAX_LEN).ok_or(Error::LengthOverflow)?;
            }
            len[x as usize] = total;
        }
        Ok(len)
    }

    pub fn len(&self) -> Result<u64> {
        Ok(self.lengths()?[self.start as usize])
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    pub fn expand(&self, cap: u64) -> Result<Vec<u32>> {
        self.expand_var(self.start, cap)
    }

    pub fn expand_var(&self, x: u32, cap: u64) -> Result<Vec<u32>> {
        let lens = match self.lengths() {
            Ok(l) => l,
            Err(Error::LengthOverflow) => return Err(Error::CapExceeded(cap)),
            Err(e) => return Err(e),
        };
        if x as usize >= self.rules.len() {
            return Err(Error::DanglingReference { var: x, what: "no such variable".into() });
        }
        if lens[x as usize] > cap {
            return Err(Error::CapExceeded(cap));
        }
        let mut out = Vec::with_capacity(lens[x as usize] as usize);
        let mut stack: Vec<(u32, usize)> = vec![(x, 0)];
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            let rhs = &self.rules[v as usize];
            if i == rhs.len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            match rhs[i] {
                Symbol::Terminal(a) => out.push(a),
                Symbol::Variable(y) => stack.push((y, 0)),
            }
        }
        Ok(out)
    }

    /// Longest variable chain below each variable, counting the variable itself.
    pub fn max_paths(&self) -> Result<Vec<u64>> {
        let order = self.topo_order()?;
        let mut mp = vec![0u64; self.rules.len()];
        for x in order {
            let below = self.rules[x as usize]
                .iter()
                .filter_map(|s| match *s {
                    Symbol::Variable(y) => Some(mp[y as usize]),
                    Symbol::Terminal(_) => None,
                })
                .max()
                .unwrap_or(0);
            mp[x as usize] = below + 1;
        }
        Ok(mp)
    }

    pub fn max_path(&self) -> Result<u64> {
        Ok(self.max_paths()?[self.start as usize])
    }

    pub fn size(&self) -> u64 {
        self.rules.iter().map(|r| r.len() as u64).sum()
    }

    pub fn stats(&self) -> Result<SslpStats> {
        let max_path = self.max_path()?;
        let r = self.rules.iter().map(|r| r.len() as u64).max().unwrap_or(0);
        let length = match self.len() {
            Ok(n) => Some(n),
            Err(Error::LengthOverflow) => None,
            Err(e) => return Err(e),
        };
        Ok(SslpStats { size: self.size(), depth: max_path * ceil_log2(r) as u64, max_path, length })
    }

    pub fn is_cnf(&self) -> bool {
        self.rules.iter().all(|r| matches!(r.as_slice(), [Symbol::Terminal(_)] | [Symbol::Variable(_), Symbol::Variable(_)]))
    }

    /// Drops variables unreachable from the start; survivors keep their relative order.
    /// Returns the new grammar and the old-to-new id map.
    pub fn gc(&self) -> Result<(Sslp, Vec<Option<u32>>)> {
        let live_order = self.reachable_order()?;
        let mut live = vec![false; self.rules.len()];
        for &x in &live_order {
            live[x as usize] = true;
        }
        let mut map = vec![None; self.rules.len()];
        let mut next = 0u32;
        for (x, &l) in live.iter().enumerate() {
            if l {
                map[x] = Some(next);
                next += 1;
            }
        }
        let rules = self
            .rules
            .iter()
            .enumerate()
            .filter(|&(x, _)| live[x])
            .map(|(_, rhs)| {
                rhs.iter()
                    .map(|s| match *s {
                        Symbol::Variable(y) => Symbol::Variable(map[y as usize].unwrap()),
                        t => t,
                    })
                    .collect()
            })
            .collect();
        let start = map[self.start as usize].unwrap();
        Ok((Sslp { alphabet_size: self.alphabet_size, rules, start }, map))
    }

    /// Chomsky normal form: every rule is one terminal or two variables.
    ///
    /// Empty-producing variables are substituted away first. Longer right-hand
    /// sides become balanced binary trees. Only variables reachable from the
    /// start survive.
    pub fn to_cnf(&self) -> Result<Sslp> {
        let order = self.reachable_order()?;
        let m = self.rules.len();
        let mut nullable = vec![false; m];
        for &x in &order {
            nullable[x as usize] =
                self.rules[x as usize].iter().all(|s| matches!(*s, Symbol::Variable(y) if nullable[y as usize]));
        }
        if nullable[self.start as usize] {
            return Err(Error::EmptyString);
        }
        let mut out: Vec<Vec<Symbol>> = Vec::new();
        let mut term_var: Vec<Option<u32>> = vec![None; self.alphabet_size as usize];
        let mut map: Vec<u32> = vec![u32::MAX; m];
        let mut items: Vec<u32> = Vec::new();
        for &x in &order {
            if nullable[x as usize] {
                continue;
            }
            let rhs = &self.rules[x as usize];
            if let [Symbol::Terminal(a)] = rhs.as_slice() {
                map[x as usize] = out.len() as u32;
                out.push(vec![Symbol::Terminal(*a)]);
                continue;
            }
            items.clear();
            for s in rhs {
                match *s {
                    Symbol::Variable(y) if nullable[y as usize] => {}
                    Symbol::Variable(y) => items.push(map[y as usize]),
                    Symbol::Terminal(a) => {
                        let v = *term_var[a as usize].get_or_insert_with(|| {
                            out.push(vec![Symbol::Terminal(a)]);
                            out.len() as u32 - 1
                        });
                        items.push(v);
                    }
                }
            }
            map[x as usize] = binarize(&items, &mut out);
        }
        let g = Sslp { alphabet_size: self.alphabet_size, rules: out, start: map[self.start as usize] };
        Ok(g.gc()?.0)
    }
}

fn binarize(items: &[u32], out: &mut Vec<Vec<Symbol>>) -> u32 {
    if items.len() == 1 {
        return items[0];
    }
    let mid = items.len() / 2;
    let l = binarize(&items[..mid], out);
    let r = binarize(&items[mid..], out);
    out.push(vec![Symbol::Variable(l), Symbol::Variable(r)]);
    out.len() as u32 - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use Symbol::{Terminal as T, Variable as V};

    fn g(rules: Vec<Vec<Symbol>>, start: u32) -> Sslp {
        Sslp::new(4, rules, start)
    }

    #[test]
    fn smallest_grammar_is_valid() {
        let s = g(vec![vec![T(0)]], 0);
        s.validate().unwrap();
        let st = s.stats().unwrap();
        assert_eq!((st.size, st.max_path, st.length), (1, 1, Some(1)));
    }

    #[test]
    fn self_loop_is_cyclic() {
        let s = g(vec![vec![V(0)]], 0);
        assert_eq!(s.validate(), Err(Error::CyclicGrammar(vec![0, 0])));
    }

    #[test]
    fn longer_cycle_is_named() {
        let s = g(vec![vec![V(1)], vec![T(0), V(2)], vec![V(0)]], 0);
        match s.validate() {
            Err(Error::CyclicGrammar(c)) => {
                assert_eq!(c.first(), c.last());
                assert_eq!(c.len(), 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dangling_terminal_and_variable() {
        assert!(matches!(g(vec![vec![T(9)]], 0).validate(), Err(Error::DanglingReference { .. })));
        assert!(matches!(g(vec![vec![V(3)]], 0).validate(), Err(Error::DanglingReference { .. })));
        assert!(matches!(g(vec![vec![T(0)]], 2).validate(), Err(Error::DanglingReference { .. })));
    }

    #[test]
    fn expand_small() {
        assert_eq!(g(vec![vec![T(0), T(1), T(0)]], 0).expand(10).unwrap(), vec![0, 1, 0]);
        // S -> A B, A -> t0 t0, B -> A t1
        let s = g(vec![vec![V(1), V(2)], vec![T(0), T(0)], vec![V(1), T(1)]], 0);
        assert_eq!(s.expand(10).unwrap(), vec![0, 0, 0, 0, 1]);
    }

    fn doubling(levels: usize) -> Sslp {
        let mut rules = vec![vec![T(0)]];
        for i in 1..=levels {
            rules.push(vec![V(i as u32 - 1), V(i as u32 - 1)]);
        }
        g(rules, levels as u32)
    }

    #[test]
    fn doubling_chain_overflows_and_caps() {
        assert_eq!(doubling(70).lengths(), Err(Error::LengthOverflow));
        assert_eq!(doubling(10).expand(8), Err(Error::CapExceeded(8)));
        let st = doubling(70).stats().unwrap();
        assert_eq!(st.length, None);
        assert_eq!(st.max_path, 71);
    }

    #[test]
    fn doubling_chain_stats() {
        for k in 0..=12 {
            let d = doubling(k);
            let st = d.stats().unwrap();
            assert_eq!(st.max_path, k as u64 + 1);
            assert_eq!(st.length, Some(1 << k));
            assert_eq!(d.expand(1 << 20).unwrap().len(), 1 << k);
        }
    }

    #[test]
    fn cnf_of_width_four_is_balanced() {
        let s = g(vec![vec![T(0), T(1), T(2), T(3)]], 0);
        let c = s.to_cnf().unwrap();
        assert!(c.is_cnf());
        let binary = c.rules.iter().filter(|r| r.len() == 2).count();
        let leaves = c.rules.iter().filter(|r| r.len() == 1).count();
        assert_eq!((binary, leaves), (3, 4));
        assert_eq!(c.max_path().unwrap(), 3);
        assert_eq!(c.expand(10).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn cnf_removes_empty_rules_and_chains() {
        // S -> E A E B, E -> (empty), A -> t1, B -> A
        let s = g(vec![vec![V(1), V(2), V(1), V(3)], vec![], vec![T(1)], vec![V(2)]], 0);
        let c = s.to_cnf().unwrap();
        assert!(c.is_cnf());
        assert_eq!(c.expand(10).unwrap(), vec![1, 1]);
        assert_eq!(g(vec![vec![V(1)], vec![]], 0).to_cnf(), Err(Error::EmptyString));
    }

    #[test]
    fn cnf_is_idempotent_up_to_renaming() {
        let d = doubling(5);
        let c = d.to_cnf().unwrap();
        assert_eq!(c.var_count(), d.var_count());
        assert_eq!(c.to_cnf().unwrap(), c);
    }

    #[test]
    fn gc_keeps_order() {
        let s = g(vec![vec![T(0)], vec![V(2), V(2)], vec![T(1)]], 1);
        let (h, map) = s.gc().unwrap();
        assert_eq!(map, vec![None, Some(0), Some(1)]);
        assert_eq!(h.rules, vec![vec![V(1), V(1)], vec![T(1)]]);
    }
}
