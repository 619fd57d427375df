//! Free monoids: string grammars seen as circuits over concatenation.

use crate::algebra::{Algebra, Context, CtxLeaf, GammaSlp, Sampler, Side, Signature, SortId, SubsumptionBase, SymbolId, Term};
use crate::error::{Error, Result};
use crate::sslp::{Sslp, Symbol};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const CONCAT: SymbolId = 0;

pub fn letter(a: u32) -> SymbolId {
    1 + a
}

pub fn monoid_signature(alphabet_size: u32) -> Signature {
    let mut types = vec![vec![0, 0, 0]];
    let mut names = vec![".".to_string()];
    for a in 0..alphabet_size {
        types.push(vec![0]);
        names.push(format!("t{a}"));
    }
    Signature::new(1, types, names).expect("well formed")
}

/// Nonempty strings over `0..alphabet_size`.
#[derive(Clone, Debug)]
pub struct FreeMonoid {
    pub alphabet_size: u32,
}

impl Algebra for FreeMonoid {
    type Value = Vec<u32>;

    fn apply(&self, f: SymbolId, args: &[Vec<u32>]) -> Result<Vec<u32>> {
        match (f, args) {
            (CONCAT, [u, v]) => Ok([u.as_slice(), v.as_slice()].concat()),
            (f, []) if f >= 1 && f - 1 < self.alphabet_size => Ok(vec![f - 1]),
            _ => Err(Error::Domain(format!("symbol {f} with {} arguments", args.len()))),
        }
    }
}

impl Sampler for FreeMonoid {
    fn sample(&self, _sort: SortId, rng: &mut ChaCha8Rng) -> Vec<u32> {
        let n = rng.random_range(1..=6);
        (0..n).map(|_| rng.random_range(0..self.alphabet_size)).collect()
    }
}

/// `a x b` with `a` and `b` optional but not both absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wrap {
    pub a: bool,
    pub b: bool,
}

#[derive(Clone, Debug)]
pub struct MonoidBase {
    signature: Signature,
}

impl MonoidBase {
    pub fn new(alphabet_size: u32) -> Self {
        MonoidBase { signature: monoid_signature(alphabet_size) }
    }
}

impl SubsumptionBase for MonoidBase {
    type Elem = Wrap;

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn context(&self, e: &Wrap) -> Context {
        let mut t = Term::Leaf(CtxLeaf::Hole);
        if e.a {
            t = Term::app(CONCAT, vec![Term::Leaf(CtxLeaf::Aux(0)), t]);
        }
        if e.b {
            t = Term::app(CONCAT, vec![t, Term::Leaf(CtxLeaf::Aux(u32::from(e.a)))]);
        }
        Context { term: t, hole_sort: 0, result_sort: 0, aux_sorts: vec![0; usize::from(e.a) + usize::from(e.b)] }
    }

    fn subsume_atomic(&self, symbol: SymbolId, hole: usize) -> Result<(Wrap, Vec<Term<u32>>)> {
        match (symbol, hole) {
            (CONCAT, 0) => Ok((Wrap { a: false, b: true }, vec![Term::Leaf(0)])),
            (CONCAT, 1) => Ok((Wrap { a: true, b: false }, vec![Term::Leaf(0)])),
            _ => Err(Error::BaseMismatch(format!("no atomic context for symbol {symbol} at {hole}"))),
        }
    }

    fn compose(&self, outer: &Wrap, inner: &Wrap) -> Result<(Wrap, Vec<Term<Side>>)> {
        // a1 (a2 x b2) b1
        let cat = |l: Option<Term<Side>>, r: Option<Term<Side>>| match (l, r) {
            (Some(l), Some(r)) => Some(Term::app(CONCAT, vec![l, r])),
            (l, r) => l.or(r),
        };
        let a1 = outer.a.then_some(Term::Leaf(Side::Outer(0)));
        let b1 = outer.b.then(|| Term::Leaf(Side::Outer(u32::from(outer.a))));
        let a2 = inner.a.then_some(Term::Leaf(Side::Inner(0)));
        let b2 = inner.b.then(|| Term::Leaf(Side::Inner(u32::from(inner.a))));
        let a = cat(a1, a2);
        let b = cat(b2, b1);
        Ok((Wrap { a: a.is_some(), b: b.is_some() }, a.into_iter().chain(b).collect()))
    }

    fn elements(&self) -> Vec<Wrap> {
        vec![Wrap { a: true, b: false }, Wrap { a: false, b: true }, Wrap { a: true, b: true }]
    }
}

/// The string grammar as a circuit over concatenation, via its binary normal form.
pub fn sslp_to_gslp(g: &Sslp) -> Result<GammaSlp> {
    let cnf = g.to_cnf()?;
    let rules = cnf
        .rules
        .iter()
        .map(|r| match r.as_slice() {
            [Symbol::Terminal(a)] => Term::constant(letter(*a)),
            [Symbol::Variable(y), Symbol::Variable(z)] => Term::app(CONCAT, vec![Term::Leaf(*y), Term::Leaf(*z)]),
            _ => unreachable!("normal form"),
        })
        .collect();
    GammaSlp::infer(Arc::new(monoid_signature(cnf.alphabet_size)), rules, cnf.start)
}

/// Flattens every right-hand side back into a symbol sequence.
pub fn gslp_to_sslp(g: &GammaSlp) -> Result<Sslp> {
    let sig = &g.signature;
    if sig.sort_count != 1 || sig.symbol_count() == 0 || sig.types[0] != [0, 0, 0] {
        return Err(Error::SortMismatch("not a monoid signature".into()));
    }
    fn flat(t: &Term<u32>, out: &mut Vec<Symbol>) {
        match t {
            Term::Leaf(y) => out.push(Symbol::Variable(*y)),
            Term::App(f, args) if *f == CONCAT => args.iter().for_each(|a| flat(a, out)),
            Term::App(f, _) => out.push(Symbol::Terminal(f - 1)),
        }
    }
    let rules = g
        .rules
        .iter()
        .map(|r| {
            let mut v = Vec::new();
            flat(r, &mut v);
            v
        })
        .collect();
    let s = Sslp::new(sig.symbol_count() as u32 - 1, rules, g.start);
    s.validate()?;
    Ok(s)
}
