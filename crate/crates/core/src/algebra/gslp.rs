use super::signature::{Signature, SortId};
use super::term::Term;
use super::Algebra;
use crate::error::{Error, Result};
use crate::sslp::{ceil_log2, MAX_LEN};
use std::sync::Arc;

/// A straight-line program over a many-sorted signature. Variables are the
/// leaves of right-hand sides; constants are nullary applications.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaSlp {
    pub signature: Arc<Signature>,
    pub sorts: Vec<SortId>,
    pub rules: Vec<Term<u32>>,
    pub start: u32,
}

fn leaves(t: &Term<u32>) -> Vec<u32> {
    let mut v = Vec::new();
    t.for_each_leaf(&mut |&y| v.push(y));
    v
}

/// Children-before-parents order of all nodes, or the cycle found.
pub(crate) fn topo_sort(n: usize, children: impl Fn(usize) -> Vec<u32>) -> Result<Vec<u32>> {
    let mut color = vec![0u8; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        color[root] = 1;
        let mut stack = vec![(root as u32, children(root), 0usize)];
        while let Some(top) = stack.last_mut() {
            if top.2 < top.1.len() {
                let y = top.1[top.2];
                top.2 += 1;
                match color[y as usize] {
                    0 => {
                        color[y as usize] = 1;
                        let c = children(y as usize);
                        stack.push((y, c, 0));
                    }
                    1 => {
                        let from = stack.iter().position(|e| e.0 == y).unwrap();
                        let mut cyc: Vec<u32> = stack[from..].iter().map(|e| e.0).collect();
                        cyc.push(y);
                        return Err(Error::CyclicGrammar(cyc));
                    }
                    _ => {}
                }
            } else {
                color[top.0 as usize] = 2;
                order.push(top.0);
                stack.pop();
            }
        }
    }
    Ok(order)
}

fn add(a: u64, b: u64) -> Result<u64> {
    a.checked_add(b).filter(|&s| s < MAX_LEN).ok_or(Error::CountOverflow)
}

impl GammaSlp {
    /// Builds a grammar, inferring each variable's sort from its right-hand side.
    pub fn infer(signature: Arc<Signature>, rules: Vec<Term<u32>>, start: u32) -> Result<Self> {
        let g = GammaSlp { signature, sorts: vec![0; rules.len()], rules, start };
        let order = g.structural_order()?;
        let mut sorts: Vec<Option<SortId>> = vec![None; g.rules.len()];
        for x in order {
            let s = g.rules[x as usize].sort(&g.signature, &mut |&y| {
                sorts[y as usize].ok_or_else(|| Error::SortMismatch(format!("variable {y} has no sort")))
            })?;
            sorts[x as usize] = Some(s);
        }
        Ok(GammaSlp { sorts: sorts.into_iter().map(Option::unwrap).collect(), ..g })
    }

    pub fn var_count(&self) -> usize {
        self.rules.len()
    }

    fn structural_order(&self) -> Result<Vec<u32>> {
        let m = self.rules.len();
        if m == 0 {
            return Err(Error::Invalid("grammar has no variables".into()));
        }
        if self.start as usize >= m {
            return Err(Error::DanglingReference { var: self.start, what: "start variable".into() });
        }
        for (x, r) in self.rules.iter().enumerate() {
            let mut bad = None;
            r.for_each_leaf(&mut |&y| {
                if y as usize >= m {
                    bad = Some(y);
                }
            });
            if let Some(y) = bad {
                return Err(Error::DanglingReference { var: x as u32, what: format!("variable {y}") });
            }
        }
        topo_sort(m, |x| leaves(&self.rules[x]))
    }

    /// All variables, children before parents, after checking sorts and acyclicity.
    pub fn topo_order(&self) -> Result<Vec<u32>> {
        if self.sorts.len() != self.rules.len() {
            return Err(Error::Invalid("one sort per variable required".into()));
        }
        let order = self.structural_order()?;
        for (x, r) in self.rules.iter().enumerate() {
            let s = r.sort(&self.signature, &mut |&y| Ok(self.sorts[y as usize]))?;
            if s != self.sorts[x] {
                return Err(Error::SortMismatch(format!(
                    "variable {x} declared with sort {} but derives sort {s}",
                    self.sorts[x]
                )));
            }
        }
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        self.topo_order().map(|_| ())
    }

    pub fn reachable_order(&self) -> Result<Vec<u32>> {
        let order = self.topo_order()?;
        let mut live = vec![false; self.rules.len()];
        live[self.start as usize] = true;
        for &x in order.iter().rev() {
            if live[x as usize] {
                self.rules[x as usize].for_each_leaf(&mut |&y| live[y as usize] = true);
            }
        }
        Ok(order.into_iter().filter(|&x| live[x as usize]).collect())
    }

    /// Sum of right-hand-side edge counts.
    pub fn size(&self) -> u64 {
        self.rules.iter().map(|r| r.edge_count() as u64).sum()
    }

    pub fn unfolded_sizes(&self) -> Result<Vec<u64>> {
        fn go(t: &Term<u32>, us: &[u64]) -> Result<u64> {
            match t {
                Term::Leaf(y) => Ok(us[*y as usize]),
                Term::App(_, args) => args.iter().try_fold(1u64, |acc, a| add(acc, go(a, us)?)),
            }
        }
        let mut us = vec![0u64; self.rules.len()];
        for x in self.reachable_order()? {
            us[x as usize] = go(&self.rules[x as usize], &us)?;
        }
        Ok(us)
    }

    /// Node count of the derived term.
    pub fn unfolded_size(&self) -> Result<u64> {
        Ok(self.unfolded_sizes()?[self.start as usize])
    }

    /// Longest chain of symbol applications from the start down to a constant.
    pub fn max_paths(&self) -> Result<Vec<u64>> {
        fn go(t: &Term<u32>, mp: &[u64]) -> u64 {
            match t {
                Term::Leaf(y) => mp[*y as usize],
                Term::App(_, args) if args.is_empty() => 0,
                Term::App(_, args) => 1 + args.iter().map(|a| go(a, mp)).max().unwrap(),
            }
        }
        let mut mp = vec![0u64; self.rules.len()];
        for x in self.topo_order()? {
            mp[x as usize] = go(&self.rules[x as usize], &mp);
        }
        Ok(mp)
    }

    pub fn max_path(&self) -> Result<u64> {
        Ok(self.max_paths()?[self.start as usize])
    }

    /// `max_path * ceil(log2 r)` for the largest rank `r` (at least 1).
    pub fn depth(&self) -> Result<u64> {
        let r = self.signature.max_rank().max(2) as u64;
        Ok(self.max_path()? * u64::from(ceil_log2(r)))
    }

    pub fn evaluate<A: Algebra>(&self, alg: &A) -> Result<A::Value> {
        fn go<A: Algebra>(t: &Term<u32>, vals: &[Option<A::Value>], alg: &A) -> Result<A::Value> {
            match t {
                Term::Leaf(y) => Ok(vals[*y as usize].clone().expect("children first")),
                Term::App(f, args) => {
                    let a: Vec<A::Value> = args.iter().map(|t| go(t, vals, alg)).collect::<Result<_>>()?;
                    alg.apply(*f, &a)
                }
            }
        }
        let mut vals: Vec<Option<A::Value>> = vec![None; self.rules.len()];
        for x in self.reachable_order()? {
            vals[x as usize] = Some(go(&self.rules[x as usize], &vals, alg)?);
        }
        Ok(vals[self.start as usize].take().unwrap())
    }

    /// Preorder symbol sequence of the derived term (the term is determined by it).
    pub fn unfold(&self, cap: u64) -> Result<Vec<u32>> {
        let n = match self.unfolded_size() {
            Ok(n) => n,
            Err(Error::CountOverflow) => return Err(Error::CapExceeded(cap)),
            Err(e) => return Err(e),
        };
        if n > cap {
            return Err(Error::CapExceeded(cap));
        }
        let mut out = Vec::with_capacity(n as usize);
        let mut stack: Vec<&Term<u32>> = vec![&self.rules[self.start as usize]];
        while let Some(t) = stack.pop() {
            match t {
                Term::Leaf(y) => stack.push(&self.rules[*y as usize]),
                Term::App(f, args) => {
                    out.push(*f);
                    stack.extend(args.iter().rev());
                }
            }
        }
        Ok(out)
    }

    /// Drops variables unreachable from the start; survivors keep their relative order.
    pub fn gc(&self) -> Result<(GammaSlp, Vec<Option<u32>>)> {
        let order = self.reachable_order()?;
        let mut keep = vec![false; self.rules.len()];
        for &x in &order {
            keep[x as usize] = true;
        }
        let mut map = vec![None; self.rules.len()];
        let mut next = 0u32;
        for (x, k) in keep.iter().enumerate() {
            if *k {
                map[x] = Some(next);
                next += 1;
            }
        }
        let mut rules = Vec::with_capacity(next as usize);
        let mut sorts = Vec::with_capacity(next as usize);
        for (x, k) in keep.iter().enumerate() {
            if *k {
                rules.push(self.rules[x].subst(&mut |&y| Term::Leaf(map[y as usize].unwrap())));
                sorts.push(self.sorts[x]);
            }
        }
        let g = GammaSlp { signature: self.signature.clone(), sorts, rules, start: map[self.start as usize].unwrap() };
        Ok((g, map))
    }

    /// Every right-hand side becomes one symbol applied to variables; alias
    /// chains are removed and nested subterms get fresh variables.
    pub fn standardize(&self) -> Result<GammaSlp> {
        let order = self.topo_order()?;
        let mut target: Vec<u32> = (0..self.rules.len() as u32).collect();
        for &x in &order {
            if let Term::Leaf(y) = self.rules[x as usize] {
                target[x as usize] = target[y as usize];
            }
        }
        let mut rules = self.rules.clone();
        let mut sorts = self.sorts.clone();
        fn flat(
            t: &Term<u32>,
            target: &[u32],
            sig: &Signature,
            rules: &mut Vec<Term<u32>>,
            sorts: &mut Vec<SortId>,
        ) -> Term<u32> {
            match t {
                Term::Leaf(y) => Term::Leaf(target[*y as usize]),
                Term::App(f, args) => {
                    let mut out = Vec::with_capacity(args.len());
                    for a in args {
                        match a {
                            Term::Leaf(y) => out.push(Term::Leaf(target[*y as usize])),
                            Term::App(g, _) => {
                                let r = flat(a, target, sig, rules, sorts);
                                rules.push(r);
                                sorts.push(sig.result_sort(*g));
                                out.push(Term::Leaf(rules.len() as u32 - 1));
                            }
                        }
                    }
                    Term::App(*f, out)
                }
            }
        }
        for x in 0..self.rules.len() {
            let r = flat(&self.rules[x], &target, &self.signature, &mut rules, &mut sorts);
            rules[x] = r;
        }
        let g = GammaSlp { signature: self.signature.clone(), sorts, rules, start: target[self.start as usize] };
        Ok(g.gc()?.0)
    }

    /// Removes variables whose right-hand side is a bare variable, leaving
    /// other right-hand sides as they are.
    pub fn collapse_aliases(&self) -> Result<GammaSlp> {
        let order = self.topo_order()?;
        let mut target: Vec<u32> = (0..self.rules.len() as u32).collect();
        for &x in &order {
            if let Term::Leaf(y) = self.rules[x as usize] {
                target[x as usize] = target[y as usize];
            }
        }
        let rules = self.rules.iter().map(|r| r.subst(&mut |&y| Term::Leaf(target[y as usize]))).collect();
        let g =
            GammaSlp { signature: self.signature.clone(), sorts: self.sorts.clone(), rules, start: target[self.start as usize] };
        Ok(g.gc()?.0)
    }

    pub fn is_standard(&self) -> bool {
        self.rules.iter().all(|r| match r {
            Term::Leaf(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_leaf),
        })
    }
}
