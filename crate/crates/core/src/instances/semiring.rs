//! Semirings with commutative addition: `+`, `*` and numbered constants.

use crate::algebra::{Algebra, Context, CtxLeaf, Sampler, Side, Signature, SortId, SubsumptionBase, SymbolId, Term};
use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const ADD: SymbolId = 0;
pub const MUL: SymbolId = 1;

/// Symbol of constant `i`.
pub fn constant(i: u32) -> SymbolId {
    2 + i
}

/// One sort, `+` and `*` binary, then `constants` nullary symbols.
pub fn semiring_signature(constants: u32) -> Signature {
    let mut types = vec![vec![0, 0, 0], vec![0, 0, 0]];
    let mut names = vec!["+".to_string(), "*".to_string()];
    for i in 0..constants {
        types.push(vec![0]);
        names.push(format!("c{i}"));
    }
    Signature::new(1, types, names).expect("well formed")
}

/// Integers modulo `modulus`; constant `i` denotes `constants[i]`.
#[derive(Clone, Debug)]
pub struct ZMod {
    pub modulus: u64,
    pub constants: Vec<u64>,
}

impl Algebra for ZMod {
    type Value = u64;

    fn apply(&self, f: SymbolId, args: &[u64]) -> Result<u64> {
        let m = self.modulus as u128;
        match (f, args) {
            (ADD, [a, b]) => Ok(((*a as u128 + *b as u128) % m) as u64),
            (MUL, [a, b]) => Ok(((*a as u128 * *b as u128) % m) as u64),
            (c, []) if c >= 2 => self
                .constants
                .get((c - 2) as usize)
                .map(|&v| v % self.modulus)
                .ok_or_else(|| Error::Domain(format!("no value for constant {}", c - 2))),
            _ => Err(Error::Domain(format!("symbol {f} with {} arguments", args.len()))),
        }
    }
}

impl Sampler for ZMod {
    fn sample(&self, _sort: SortId, rng: &mut ChaCha8Rng) -> u64 {
        rng.random_range(0..self.modulus)
    }
}

/// `a*x*b + c` with each of `a`, `b`, `c` optional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Affine {
    pub a: bool,
    pub b: bool,
    pub c: bool,
}

#[derive(Clone, Debug)]
pub struct SemiringBase {
    signature: Signature,
}

impl SemiringBase {
    pub fn new(constants: u32) -> Self {
        SemiringBase { signature: semiring_signature(constants) }
    }

    pub fn for_signature(signature: Signature) -> Result<Self> {
        let ok = signature.sort_count == 1
            && signature.symbol_count() >= 2
            && signature.types[0] == [0, 0, 0]
            && signature.types[1] == [0, 0, 0]
            && signature.types[2..].iter().all(|t| t.len() == 1);
        if !ok {
            return Err(Error::BaseMismatch("not a semiring signature".into()));
        }
        Ok(SemiringBase { signature })
    }
}

fn product<L: Clone>(parts: Vec<Term<L>>) -> Option<Term<L>> {
    parts.into_iter().reduce(|l, r| Term::app(MUL, vec![l, r]))
}

impl SubsumptionBase for SemiringBase {
    type Elem = Affine;

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn context(&self, e: &Affine) -> Context {
        let mut next = 0;
        let mut aux = || {
            next += 1;
            Term::Leaf(CtxLeaf::Aux(next - 1))
        };
        let mut t = Term::Leaf(CtxLeaf::Hole);
        if e.a {
            t = Term::app(MUL, vec![aux(), t]);
        }
        if e.b {
            t = Term::app(MUL, vec![t, aux()]);
        }
        if e.c {
            t = Term::app(ADD, vec![t, aux()]);
        }
        let n = [e.a, e.b, e.c].iter().filter(|&&p| p).count();
        Context { term: t, hole_sort: 0, result_sort: 0, aux_sorts: vec![0; n] }
    }

    fn subsume_atomic(&self, symbol: SymbolId, hole: usize) -> Result<(Affine, Vec<Term<u32>>)> {
        let arg = vec![Term::Leaf(0)];
        match (symbol, hole) {
            // addition commutes, so y + x is x + y
            (ADD, 0 | 1) => Ok((Affine { a: false, b: false, c: true }, arg)),
            (MUL, 0) => Ok((Affine { a: false, b: true, c: false }, arg)),
            (MUL, 1) => Ok((Affine { a: true, b: false, c: false }, arg)),
            _ => Err(Error::BaseMismatch(format!("no atomic context for symbol {symbol} at {hole}"))),
        }
    }

    fn compose(&self, outer: &Affine, inner: &Affine) -> Result<(Affine, Vec<Term<Side>>)> {
        // a1 (a2 x b2 + c2) b1 + c1 = (a1 a2) x (b2 b1) + (a1 c2 b1 + c1)
        let params = |e: &Affine, side: fn(u32) -> Side| {
            let mut i = 0;
            let mut take = |p: bool| {
                p.then(|| {
                    i += 1;
                    Term::Leaf(side(i - 1))
                })
            };
            (take(e.a), take(e.b), take(e.c))
        };
        let (a1, b1, c1) = params(outer, Side::Outer);
        let (a2, b2, c2) = params(inner, Side::Inner);
        let a = product([a1.clone(), a2].into_iter().flatten().collect());
        let b = product([b2, b1.clone()].into_iter().flatten().collect());
        let spread = c2.map(|c2| product([a1, Some(c2), b1].into_iter().flatten().collect()).unwrap());
        let c = match (spread, c1) {
            (Some(s), Some(c1)) => Some(Term::app(ADD, vec![s, c1])),
            (s, c1) => s.or(c1),
        };
        let e = Affine { a: a.is_some(), b: b.is_some(), c: c.is_some() };
        Ok((e, [a, b, c].into_iter().flatten().collect()))
    }

    fn elements(&self) -> Vec<Affine> {
        (1..8u8).map(|m| Affine { a: m & 1 != 0, b: m & 2 != 0, c: m & 4 != 0 }).collect()
    }
}
