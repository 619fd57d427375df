//! The forest algebra: forests and one-hole forest contexts under horizontal
//! and vertical concatenation, forest grammars over it, and their balancing.

use super::{parse_alphabet, write_alphabet};
use crate::algebra::{
    balance_circuit, parse_body, write_body, Algebra, Context, CtxLeaf, GammaSlp, Sampler, Side, Signature, SortId,
    SubsumptionBase, SymbolId, Term,
};
use crate::balance::{mul_mod, pow_mod};
use crate::error::{Error, Result};
use crate::query::{hash_slice, MERSENNE_61};
use crate::sslp::text::{lines, perr};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const FOREST: SortId = 0;
pub const CONTEXT: SortId = 1;

/// forest, forest -> forest
pub const H00: SymbolId = 0;
/// forest, context -> context
pub const H01: SymbolId = 1;
/// context, forest -> context
pub const H10: SymbolId = 2;
/// context, forest -> forest (plug a forest into the hole)
pub const V0: SymbolId = 3;
/// context, context -> context
pub const V1: SymbolId = 4;
pub const EPS: SymbolId = 5;
pub const STAR: SymbolId = 6;

/// The constant `a(*)`.
pub fn node(a: u32) -> SymbolId {
    7 + a
}

pub fn forest_signature(alphabet_size: u32) -> Signature {
    let mut types = vec![
        vec![FOREST, FOREST, FOREST],
        vec![FOREST, CONTEXT, CONTEXT],
        vec![CONTEXT, FOREST, CONTEXT],
        vec![CONTEXT, FOREST, FOREST],
        vec![CONTEXT, CONTEXT, CONTEXT],
        vec![FOREST],
        vec![CONTEXT],
    ];
    let mut names: Vec<String> = ["h00", "h01", "h10", "v0", "v1", "eps", "star"].map(String::from).to_vec();
    for a in 0..alphabet_size {
        types.push(vec![CONTEXT]);
        names.push(format!("n{a}"));
    }
    Signature::new(2, types, names).expect("well formed")
}

/// Alphabet size of a forest signature.
pub fn forest_alphabet(sig: &Signature) -> Result<u32> {
    let k = sig.symbol_count().checked_sub(7).ok_or_else(|| Error::SortMismatch("not a forest signature".into()))?;
    let want = forest_signature(k as u32);
    if sig.sort_count != want.sort_count || sig.types != want.types {
        return Err(Error::SortMismatch("not a forest signature".into()));
    }
    Ok(k as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FTok {
    Open(u32),
    Close,
    Star,
}

impl FTok {
    pub fn code(self) -> u32 {
        match self {
            FTok::Close => 0,
            FTok::Star => 1,
            FTok::Open(a) => 2 + a,
        }
    }
}

pub fn node_count(f: &[FTok]) -> usize {
    f.iter().filter(|t| matches!(t, FTok::Open(_))).count()
}

/// Karp-Rabin hash of the token codes, consistent with [`ForestHash`].
pub fn forest_hash(f: &[FTok], base: u64, modulus: u64) -> u64 {
    hash_slice(&f.iter().map(|t| t.code()).collect::<Vec<_>>(), base, modulus)
}

/// Bracket notation: `b(a a c)`, a leaf is just its label, the hole is `*`.
pub fn to_brackets(f: &[FTok], letters: &[String]) -> String {
    let mut s = String::new();
    let mut first = true;
    for (i, t) in f.iter().enumerate() {
        match *t {
            FTok::Open(a) => {
                if !first {
                    s.push(' ');
                }
                s.push_str(letters.get(a as usize).map_or("?", |l| l.as_str()));
                if f.get(i + 1) != Some(&FTok::Close) {
                    s.push('(');
                    first = true;
                } else {
                    first = false;
                }
            }
            FTok::Star => {
                if !first {
                    s.push(' ');
                }
                s.push('*');
                first = false;
            }
            FTok::Close => {
                if !matches!(i.checked_sub(1).map(|j| f[j]), Some(FTok::Open(_))) {
                    s.push(')');
                }
                first = false;
            }
        }
    }
    s
}

fn stars(v: &[FTok]) -> usize {
    v.iter().filter(|t| **t == FTok::Star).count()
}

/// Forests and contexts as token sequences.
#[derive(Clone, Debug)]
pub struct ForestAlgebra {
    pub alphabet_size: u32,
}

impl Algebra for ForestAlgebra {
    type Value = Vec<FTok>;

    fn apply(&self, f: SymbolId, args: &[Vec<FTok>]) -> Result<Vec<FTok>> {
        let bad = || Error::Domain(format!("symbol {f} on arguments of the wrong sort"));
        let sig_sorts: &[usize] = match f {
            H00 => &[0, 0],
            H01 => &[0, 1],
            H10 => &[1, 0],
            V0 => &[1, 0],
            V1 => &[1, 1],
            _ => &[],
        };
        if args.len() != sig_sorts.len() || args.iter().zip(sig_sorts).any(|(a, &s)| stars(a) != s) {
            return Err(bad());
        }
        Ok(match f {
            H00 | H01 | H10 => [args[0].as_slice(), args[1].as_slice()].concat(),
            V0 | V1 => {
                let p = args[0].iter().position(|t| *t == FTok::Star).unwrap();
                [&args[0][..p], args[1].as_slice(), &args[0][p + 1..]].concat()
            }
            EPS => Vec::new(),
            STAR => vec![FTok::Star],
            a if a >= 7 && a - 7 < self.alphabet_size => vec![FTok::Open(a - 7), FTok::Star, FTok::Close],
            _ => return Err(bad()),
        })
    }
}

fn random_forest(k: u32, n: usize, rng: &mut ChaCha8Rng) -> Vec<FTok> {
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for i in 0..n {
        let p = rng.random_range(0..=i);
        // p == i means a root
        children[if p == i { n } else { p }].push(i);
    }
    let labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..k)).collect();
    fn emit(v: usize, children: &[Vec<usize>], labels: &[u32], out: &mut Vec<FTok>) {
        out.push(FTok::Open(labels[v]));
        for &c in &children[v] {
            emit(c, children, labels, out);
        }
        out.push(FTok::Close);
    }
    let mut out = Vec::with_capacity(2 * n + 1);
    for &r in &children[n] {
        emit(r, &children, &labels, &mut out);
    }
    out
}

impl Sampler for ForestAlgebra {
    fn sample(&self, sort: SortId, rng: &mut ChaCha8Rng) -> Vec<FTok> {
        if sort == FOREST {
            let n = rng.random_range(0..=12);
            random_forest(self.alphabet_size, n, rng)
        } else {
            let n = rng.random_range(0..=11);
            let mut f = random_forest(self.alphabet_size, n, rng);
            let at = rng.random_range(0..=f.len());
            f.insert(at, FTok::Star);
            f
        }
    }
}

/// Hash and token length of a forest, or of both sides of a context's hole.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HashValue {
    Forest { hash: u64, len: u64 },
    Context { left: u64, left_len: u64, right: u64, right_len: u64 },
}

/// Evaluates forest grammars to fingerprints of their token sequences.
#[derive(Clone, Debug)]
pub struct ForestHash {
    pub alphabet_size: u32,
    pub base: u64,
    pub modulus: u64,
}

impl ForestHash {
    pub fn new(alphabet_size: u32, base: u64) -> Self {
        ForestHash { alphabet_size, base: base % MERSENNE_61, modulus: MERSENNE_61 }
    }

    fn cat(&self, h1: u64, h2: u64, l2: u64) -> u64 {
        (mul_mod(h1, pow_mod(self.base, l2, self.modulus), self.modulus) + h2) % self.modulus
    }
}

impl Algebra for ForestHash {
    type Value = HashValue;

    fn apply(&self, f: SymbolId, args: &[HashValue]) -> Result<HashValue> {
        use HashValue::{Context as C, Forest as F};
        Ok(match (f, args) {
            (H00, [F { hash: h1, len: l1 }, F { hash: h2, len: l2 }]) => F { hash: self.cat(*h1, *h2, *l2), len: l1 + l2 },
            (H01, [F { hash, len }, C { left, left_len, right, right_len }]) => {
                C { left: self.cat(*hash, *left, *left_len), left_len: len + left_len, right: *right, right_len: *right_len }
            }
            (H10, [C { left, left_len, right, right_len }, F { hash, len }]) => {
                C { left: *left, left_len: *left_len, right: self.cat(*right, *hash, *len), right_len: right_len + len }
            }
            (V0, [C { left, left_len, right, right_len }, F { hash, len }]) => {
                let mid = self.cat(*left, *hash, *len);
                F { hash: self.cat(mid, *right, *right_len), len: left_len + len + right_len }
            }
            (
                V1,
                [C { left: l1, left_len: ll1, right: r1, right_len: rl1 }, C { left: l2, left_len: ll2, right: r2, right_len: rl2 }],
            ) => C { left: self.cat(*l1, *l2, *ll2), left_len: ll1 + ll2, right: self.cat(*r2, *r1, *rl1), right_len: rl2 + rl1 },
            (EPS, []) => F { hash: 0, len: 0 },
            (STAR, []) => C { left: 0, left_len: 0, right: 0, right_len: 0 },
            (a, []) if a >= 7 && a - 7 < self.alphabet_size => {
                C { left: (u64::from(FTok::Open(a - 7).code()) + 1) % self.modulus, left_len: 1, right: 1, right_len: 1 }
            }
            _ => return Err(Error::Domain(format!("symbol {f} on arguments of the wrong sort"))),
        })
    }
}

/// Node counts, saturating.
struct NodeCount;

impl Algebra for NodeCount {
    type Value = u64;

    fn apply(&self, f: SymbolId, args: &[u64]) -> Result<u64> {
        Ok(match f {
            EPS | STAR => 0,
            H00..=V1 => args[0].saturating_add(args[1]),
            _ => 1,
        })
    }
}

/// Number of nodes of the forest (or context) a grammar produces.
pub fn forest_size(g: &GammaSlp) -> Result<u64> {
    forest_alphabet(&g.signature)?;
    g.evaluate(&NodeCount)
}

/// Tokens of the produced forest; `cap` bounds the node count.
pub fn expand_forest(g: &GammaSlp, cap: u64) -> Result<Vec<FTok>> {
    let k = forest_alphabet(&g.signature)?;
    if forest_size(g)? > cap {
        return Err(Error::CapExceeded(cap));
    }
    g.evaluate(&ForestAlgebra { alphabet_size: k })
}

/// Shapes of the base contexts; `x` is the forest hole, `y` the context hole.
/// Every parameter is a context except the trailing forest `s` of B0, DL, DR.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ForestShape {
    /// p . x
    A,
    /// t1 . (t2 | (t3 . x))
    CL,
    /// t1 . ((t3 . x) | t2)
    CR,
    /// p . y . s
    B0,
    /// p . y . q
    B1,
    /// t1 . (t2 | (t3 . y . s))
    DL,
    /// t1 . ((t3 . y . s) | t2)
    DR,
}

#[derive(Clone, Debug)]
pub struct ForestBase {
    signature: Signature,
}

impl ForestBase {
    pub fn new(alphabet_size: u32) -> Self {
        ForestBase { signature: forest_signature(alphabet_size) }
    }
}

fn app<L>(f: SymbolId, a: Term<L>, b: Term<L>) -> Term<L> {
    Term::app(f, vec![a, b])
}

fn star<L>() -> Term<L> {
    Term::constant(STAR)
}

/// The context that sits between `t1` and `t3` once `s` fills the hole of `t2`.
fn bridge<L>(left: bool, u1: Term<L>, u2: Term<L>, u3: Term<L>, s: Term<L>) -> Term<L> {
    let plugged = app(V0, u2, s);
    let side = if left { app(H01, plugged, u3) } else { app(H10, u3, plugged) };
    app(V1, u1, side)
}

impl SubsumptionBase for ForestBase {
    type Elem = ForestShape;

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn context(&self, e: &ForestShape) -> Context {
        use ForestShape::*;
        let p = |i| Term::Leaf(CtxLeaf::Aux(i));
        let h = || Term::Leaf(CtxLeaf::Hole);
        let (term, hole_sort, result_sort, aux_sorts) = match e {
            A => (app(V0, p(0), h()), FOREST, FOREST, vec![CONTEXT]),
            CL => (app(V1, p(0), app(H10, p(1), app(V0, p(2), h()))), FOREST, CONTEXT, vec![CONTEXT; 3]),
            CR => (app(V1, p(0), app(H01, app(V0, p(2), h()), p(1))), FOREST, CONTEXT, vec![CONTEXT; 3]),
            B0 => (app(V0, p(0), app(V0, h(), p(1))), CONTEXT, FOREST, vec![CONTEXT, FOREST]),
            B1 => (app(V1, app(V1, p(0), h()), p(1)), CONTEXT, CONTEXT, vec![CONTEXT; 2]),
            DL => (
                app(V1, p(0), app(H10, p(1), app(V0, p(2), app(V0, h(), p(3))))),
                CONTEXT,
                CONTEXT,
                vec![CONTEXT, CONTEXT, CONTEXT, FOREST],
            ),
            DR => (
                app(V1, p(0), app(H01, app(V0, p(2), app(V0, h(), p(3))), p(1))),
                CONTEXT,
                CONTEXT,
                vec![CONTEXT, CONTEXT, CONTEXT, FOREST],
            ),
        };
        Context { term, hole_sort, result_sort, aux_sorts }
    }

    fn subsume_atomic(&self, symbol: SymbolId, hole: usize) -> Result<(ForestShape, Vec<Term<u32>>)> {
        use ForestShape::*;
        let o = || Term::Leaf(0);
        Ok(match (symbol, hole) {
            (H00, 0) => (A, vec![app(H10, star(), o())]),
            (H00, 1) => (A, vec![app(H01, o(), star())]),
            (H01, 0) => (CR, vec![star(), o(), star()]),
            (H01, 1) => (B1, vec![app(H01, o(), star()), star()]),
            (H10, 0) => (B1, vec![app(H10, star(), o()), star()]),
            (H10, 1) => (CL, vec![star(), o(), star()]),
            (V0, 0) => (B0, vec![star(), o()]),
            (V0, 1) => (A, vec![o()]),
            (V1, 0) => (B1, vec![star(), o()]),
            (V1, 1) => (B1, vec![o(), star()]),
            _ => return Err(Error::BaseMismatch(format!("no atomic context for symbol {symbol} at {hole}"))),
        })
    }

    fn compose(&self, outer: &ForestShape, inner: &ForestShape) -> Result<(ForestShape, Vec<Term<Side>>)> {
        use ForestShape::*;
        let o = |i| Term::Leaf(Side::Outer(i));
        let n = |i| Term::Leaf(Side::Inner(i));
        let v1 = |a, b| app(V1, a, b);
        let v0 = |a, b| app(V0, a, b);
        let is_left = |e: &ForestShape| matches!(e, CL | DL);
        Ok(match (outer, inner) {
            (A, A) => (A, vec![v1(o(0), n(0))]),
            (A, B0) => (B0, vec![v1(o(0), n(0)), n(1)]),
            (CL | CR, A) => (*outer, vec![o(0), o(1), v1(o(2), n(0))]),
            (CL, B0) => (DL, vec![o(0), o(1), v1(o(2), n(0)), n(1)]),
            (CR, B0) => (DR, vec![o(0), o(1), v1(o(2), n(0)), n(1)]),
            (B0, CL | CR) => (A, vec![v1(o(0), bridge(is_left(inner), n(0), n(1), n(2), o(1)))]),
            (B0, B1) => (B0, vec![v1(o(0), n(0)), v0(n(1), o(1))]),
            (B0, DL | DR) => (B0, vec![v1(o(0), bridge(is_left(inner), n(0), n(1), n(2), o(1))), n(3)]),
            (B1, CL | CR | DL | DR) => {
                let mut s = vec![v1(o(0), n(0)), v1(n(1), o(1)), n(2)];
                if matches!(inner, DL | DR) {
                    s.push(n(3));
                }
                (*inner, s)
            }
            (B1, B1) => (B1, vec![v1(o(0), n(0)), v1(n(1), o(1))]),
            (DL | DR, CL | CR) => {
                let shape = if *outer == DL { CL } else { CR };
                (shape, vec![o(0), o(1), v1(o(2), bridge(is_left(inner), n(0), n(1), n(2), o(3)))])
            }
            (DL | DR, B1) => (*outer, vec![o(0), o(1), v1(o(2), n(0)), v0(n(1), o(3))]),
            (DL | DR, DL | DR) => (*outer, vec![o(0), o(1), v1(o(2), bridge(is_left(inner), n(0), n(1), n(2), o(3))), n(3)]),
            _ => return Err(Error::BaseMismatch(format!("cannot plug {inner:?} into {outer:?}"))),
        })
    }

    fn elements(&self) -> Vec<ForestShape> {
        use ForestShape::*;
        vec![A, CL, CR, B0, B1, DL, DR]
    }
}

#[derive(Clone, Copy)]
enum Split {
    Forest(u32),
    /// hole at a root: the forests left and right of it
    Root {
        l: u32,
        r: u32,
    },
    /// hole below a node: the top with that node emptied, and its children around the hole
    Below {
        t: u32,
        l: u32,
        r: u32,
    },
}

#[derive(Clone, Copy)]
enum Eps {
    Empty,
    Forest(u32),
    /// the context and the same context with its hole deleted
    Context {
        c: u32,
        ce: u32,
    },
}

fn args2(t: &Term<u32>) -> (u32, u32) {
    match t {
        Term::App(_, a) => match (&a[0], &a[1]) {
            (Term::Leaf(y), Term::Leaf(z)) => (*y, *z),
            _ => unreachable!("standard form"),
        },
        Term::Leaf(_) => unreachable!("standard form"),
    }
}

fn push(rules: &mut Vec<Term<u32>>, t: Term<u32>) -> u32 {
    rules.push(t);
    rules.len() as u32 - 1
}

fn remove_star(g: &GammaSlp) -> Result<GammaSlp> {
    let s = g.standardize()?;
    let l = Term::Leaf;
    let mut rules: Vec<Term<u32>> = Vec::new();
    let mut map: Vec<Option<Split>> = vec![None; s.rules.len()];
    for x in s.reachable_order()? {
        let r = &s.rules[x as usize];
        let f = match r {
            Term::App(f, _) => *f,
            Term::Leaf(_) => unreachable!("standard form"),
        };
        let get = |y: u32| map[y as usize].unwrap();
        let forest = |y: u32| match get(y) {
            Split::Forest(i) => i,
            _ => unreachable!("sort checked"),
        };
        let split = match f {
            EPS => Split::Forest(push(&mut rules, Term::constant(EPS))),
            STAR => Split::Root { l: push(&mut rules, Term::constant(EPS)), r: push(&mut rules, Term::constant(EPS)) },
            a if a >= 7 => Split::Below {
                t: push(&mut rules, Term::constant(a)),
                l: push(&mut rules, Term::constant(EPS)),
                r: push(&mut rules, Term::constant(EPS)),
            },
            H00 => {
                let (y, z) = args2(r);
                Split::Forest(push(&mut rules, app(H00, l(forest(y)), l(forest(z)))))
            }
            H01 => {
                let (y, z) = args2(r);
                let y = forest(y);
                match get(z) {
                    Split::Root { l: zl, r: zr } => Split::Root { l: push(&mut rules, app(H00, l(y), l(zl))), r: zr },
                    Split::Below { t, l: zl, r: zr } => Split::Below { t: push(&mut rules, app(H01, l(y), l(t))), l: zl, r: zr },
                    Split::Forest(_) => unreachable!(),
                }
            }
            H10 => {
                let (y, z) = args2(r);
                let z = forest(z);
                match get(y) {
                    Split::Root { l: yl, r: yr } => Split::Root { l: yl, r: push(&mut rules, app(H00, l(yr), l(z))) },
                    Split::Below { t, l: yl, r: yr } => Split::Below { t: push(&mut rules, app(H10, l(t), l(z))), l: yl, r: yr },
                    Split::Forest(_) => unreachable!(),
                }
            }
            V0 => {
                let (y, z) = args2(r);
                let z = forest(z);
                let around = |yl: u32, yr: u32| app(H00, app(H00, l(yl), l(z)), l(yr));
                Split::Forest(match get(y) {
                    Split::Root { l: yl, r: yr } => push(&mut rules, around(yl, yr)),
                    Split::Below { t, l: yl, r: yr } => push(&mut rules, app(V0, l(t), around(yl, yr))),
                    Split::Forest(_) => unreachable!(),
                })
            }
            V1 => {
                let (y, z) = args2(r);
                match (get(y), get(z)) {
                    (Split::Root { l: yl, r: yr }, Split::Root { l: zl, r: zr }) => {
                        Split::Root { l: push(&mut rules, app(H00, l(yl), l(zl))), r: push(&mut rules, app(H00, l(zr), l(yr))) }
                    }
                    (Split::Root { l: yl, r: yr }, Split::Below { t, l: zl, r: zr }) => {
                        Split::Below { t: push(&mut rules, app(H01, l(yl), app(H10, l(t), l(yr)))), l: zl, r: zr }
                    }
                    (Split::Below { t, l: yl, r: yr }, Split::Root { l: zl, r: zr }) => Split::Below {
                        t,
                        l: push(&mut rules, app(H00, l(yl), l(zl))),
                        r: push(&mut rules, app(H00, l(zr), l(yr))),
                    },
                    (Split::Below { t: yt, l: yl, r: yr }, Split::Below { t: zt, l: zl, r: zr }) => Split::Below {
                        t: push(&mut rules, app(V1, l(yt), app(H01, l(yl), app(H10, l(zt), l(yr))))),
                        l: zl,
                        r: zr,
                    },
                    _ => unreachable!(),
                }
            }
            _ => unreachable!("checked signature"),
        };
        map[x as usize] = Some(split);
    }
    let start = match map[s.start as usize].unwrap() {
        Split::Forest(i) => i,
        _ => return Err(Error::SortMismatch("start variable must produce a forest".into())),
    };
    GammaSlp::infer(g.signature.clone(), rules, start)
}

fn remove_eps(g: &GammaSlp) -> Result<GammaSlp> {
    let s = g.standardize()?;
    let l = Term::Leaf;
    let mut rules: Vec<Term<u32>> = Vec::new();
    let mut map: Vec<Option<Eps>> = vec![None; s.rules.len()];
    for x in s.reachable_order()? {
        let r = &s.rules[x as usize];
        let f = match r {
            Term::App(f, _) => *f,
            Term::Leaf(_) => unreachable!("standard form"),
        };
        let get = |y: u32| map[y as usize].unwrap();
        let ctx = |y: u32| match get(y) {
            Eps::Context { c, ce } => (c, ce),
            _ => unreachable!("sort checked"),
        };
        let e = match f {
            EPS => Eps::Empty,
            a if a >= 7 => Eps::Context {
                c: push(&mut rules, Term::constant(a)),
                ce: push(&mut rules, app(V0, Term::constant(a), Term::constant(EPS))),
            },
            H00 => {
                let (y, z) = args2(r);
                match (get(y), get(z)) {
                    (Eps::Empty, Eps::Empty) => Eps::Empty,
                    (Eps::Empty, other) | (other, Eps::Empty) => other,
                    (Eps::Forest(y), Eps::Forest(z)) => Eps::Forest(push(&mut rules, app(H00, l(y), l(z)))),
                    _ => unreachable!(),
                }
            }
            H01 => {
                let (y, z) = args2(r);
                let (zc, zce) = ctx(z);
                match get(y) {
                    Eps::Empty => Eps::Context { c: zc, ce: zce },
                    Eps::Forest(y) => {
                        Eps::Context { c: push(&mut rules, app(H01, l(y), l(zc))), ce: push(&mut rules, app(H00, l(y), l(zce))) }
                    }
                    Eps::Context { .. } => unreachable!(),
                }
            }
            H10 => {
                let (y, z) = args2(r);
                let (yc, yce) = ctx(y);
                match get(z) {
                    Eps::Empty => Eps::Context { c: yc, ce: yce },
                    Eps::Forest(z) => {
                        Eps::Context { c: push(&mut rules, app(H10, l(yc), l(z))), ce: push(&mut rules, app(H00, l(yce), l(z))) }
                    }
                    Eps::Context { .. } => unreachable!(),
                }
            }
            V0 => {
                let (y, z) = args2(r);
                let (yc, yce) = ctx(y);
                match get(z) {
                    Eps::Empty => Eps::Forest(yce),
                    Eps::Forest(z) => Eps::Forest(push(&mut rules, app(V0, l(yc), l(z)))),
                    Eps::Context { .. } => unreachable!(),
                }
            }
            V1 => {
                let (y, z) = args2(r);
                let (yc, _) = ctx(y);
                let (zc, zce) = ctx(z);
                Eps::Context { c: push(&mut rules, app(V1, l(yc), l(zc))), ce: push(&mut rules, app(V0, l(yc), l(zce))) }
            }
            _ => unreachable!("no hole constants left"),
        };
        map[x as usize] = Some(e);
    }
    let start = match map[s.start as usize].unwrap() {
        Eps::Forest(i) => i,
        Eps::Empty => return Err(Error::EmptyForest),
        Eps::Context { .. } => unreachable!("sort checked"),
    };
    GammaSlp::infer(g.signature.clone(), rules, start)?.collapse_aliases()
}

/// An equivalent forest grammar without the hole constant, and with the empty
/// forest only inside right-hand sides `a(eps)`.
pub fn eliminate_eps_star(g: &GammaSlp) -> Result<GammaSlp> {
    forest_alphabet(&g.signature)?;
    g.validate()?;
    if g.sorts[g.start as usize] != FOREST {
        return Err(Error::SortMismatch("start variable must produce a forest".into()));
    }
    remove_eps(&remove_star(g)?)
}

/// Whether no rule uses the hole constant, and the empty forest only as `a(eps)`.
pub fn is_eps_star_free(g: &GammaSlp) -> bool {
    fn clean(t: &Term<u32>) -> bool {
        match t {
            Term::Leaf(_) => true,
            Term::App(f, args) => *f != EPS && *f != STAR && args.iter().all(clean),
        }
    }
    g.rules.iter().all(|r| match r {
        Term::App(V0, args) if matches!(args.as_slice(), [Term::App(a, x), Term::App(EPS, y)] if *a >= 7 && x.is_empty() && y.is_empty()) => {
            true
        }
        r => clean(r),
    })
}

/// Eliminates the constants and rebalances to logarithmic depth.
pub fn balance_fslp(g: &GammaSlp) -> Result<GammaSlp> {
    let k = forest_alphabet(&g.signature)?;
    let h = eliminate_eps_star(g)?;
    balance_circuit(&h, &ForestBase::new(k))
}

pub fn write_fslp(g: &GammaSlp, letters: &[String]) -> String {
    let mut s = String::new();
    write_alphabet("FSLP 1", letters, &mut s);
    write_body(g, &mut s);
    s
}

pub fn parse_fslp(src: &str) -> Result<(GammaSlp, Vec<String>)> {
    let ls = lines(src)?;
    if ls.first() != Some(&"FSLP 1") {
        return Err(perr(1, "expected header `FSLP 1`"));
    }
    let (letters, at) = parse_alphabet(&ls, 1)?;
    let want = forest_signature(letters.len() as u32);
    let g = parse_body(&ls, at, Some(want.names.clone()))?;
    if g.signature.types != want.types || g.signature.sort_count != want.sort_count {
        return Err(perr(at + 1, "signature does not match the forest algebra over the alphabet"));
    }
    let g = GammaSlp { signature: Arc::new(want), ..g };
    Ok((g, letters))
}

/// `b(a^m b(a^m ... b(a^m c a^m) ... a^m) a^m)` with `m = 2^n` and `2^n` b's.
pub fn example_fslp(n: u32) -> (GammaSlp, Vec<String>) {
    let (a, b, c) = (node(0), node(1), node(2));
    let l = Term::Leaf;
    let n = n as usize;
    let mut rules = vec![app(V0, Term::constant(a), Term::constant(EPS))];
    for i in 1..=n {
        rules.push(app(H00, l(i as u32 - 1), l(i as u32 - 1)));
    }
    let xn = n as u32;
    rules.push(app(V1, Term::constant(b), app(H01, l(xn), app(H10, star(), l(xn)))));
    for i in 1..=n {
        let y = (n + i) as u32;
        rules.push(app(V1, l(y), l(y)));
    }
    let yn = 2 * n as u32 + 1;
    rules.push(app(V0, l(yn), app(V0, Term::constant(c), Term::constant(EPS))));
    let start = rules.len() as u32 - 1;
    let g = GammaSlp::infer(Arc::new(forest_signature(3)), rules, start).expect("well formed");
    (g, vec!["a".into(), "b".into(), "c".into()])
}

/// A random forest grammar of at most `vars` variables producing at most
/// `max_nodes` nodes, with hole and empty constants mixed in.
pub fn random_fslp<R: Rng>(alphabet_size: u32, vars: usize, max_nodes: u64, rng: &mut R) -> GammaSlp {
    let k = alphabet_size.max(1);
    let l = Term::Leaf;
    // per variable: rule, sort, node count, derivation size (bounded so balancing stays cheap)
    let mut vs: Vec<(Term<u32>, SortId, u64, u64)> = vec![(Term::constant(EPS), FOREST, 0, 1), (star(), CONTEXT, 0, 1)];
    for a in 0..k.min(4) {
        vs.push((Term::constant(node(a)), CONTEXT, 1, 1));
        vs.push((app(V0, Term::constant(node(a)), Term::constant(EPS)), FOREST, 1, 3));
    }
    let max_deriv = 8 * max_nodes + 64;
    let mut tries = 0;
    let target = vars.max(vs.len() + 1);
    while vs.len() < target && tries < 50 * target {
        tries += 1;
        let m = vs.len();
        let pick = |want: SortId, rng: &mut R| -> Option<u32> {
            for _ in 0..20 {
                let y = if rng.random_bool(0.6) { m - 1 - rng.random_range(0..m.min(8)) } else { rng.random_range(0..m) };
                if vs[y].1 == want {
                    return Some(y as u32);
                }
            }
            None
        };
        let f = rng.random_range(0..5u32);
        let (s1, s2, res) = match f {
            H00 => (FOREST, FOREST, FOREST),
            H01 => (FOREST, CONTEXT, CONTEXT),
            H10 => (CONTEXT, FOREST, CONTEXT),
            V0 => (CONTEXT, FOREST, FOREST),
            _ => (CONTEXT, CONTEXT, CONTEXT),
        };
        let (Some(y), Some(z)) = (pick(s1, rng), pick(s2, rng)) else { continue };
        let n = vs[y as usize].2 + vs[z as usize].2;
        let d = vs[y as usize].3 + vs[z as usize].3 + 1;
        if n > max_nodes || d > max_deriv {
            continue;
        }
        vs.push((app(f, l(y), l(z)), res, n, d));
    }
    let best = (0..vs.len()).filter(|&x| vs[x].1 == FOREST).max_by_key(|&x| (vs[x].2, x)).unwrap();
    let rules = vs.into_iter().map(|v| v.0).collect();
    let g = GammaSlp::infer(Arc::new(forest_signature(k)), rules, best as u32).expect("well formed");
    g.gc().expect("acyclic").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::verify_subsumption_base;
    use rand::SeedableRng;

    fn abc() -> Vec<String> {
        vec!["a".into(), "b".into(), "c".into()]
    }

    #[test]
    fn brackets() {
        use FTok::*;
        let f = vec![Open(1), Open(0), Close, Open(0), Open(2), Close, Close, Close, Open(2), Close];
        assert_eq!(to_brackets(&f, &abc()), "b(a a(c)) c");
        let c = vec![Open(1), Star, Open(0), Close, Close];
        assert_eq!(to_brackets(&c, &abc()), "b(* a)");
        assert_eq!(to_brackets(&[], &abc()), "");
    }

    #[test]
    fn example_family_n2() {
        let (g, letters) = example_fslp(2);
        let f = expand_forest(&g, 1000).unwrap();
        let a4 = "a a a a";
        let want = format!("b({a4} b({a4} b({a4} b({a4} c {a4}) {a4}) {a4}) {a4})");
        assert_eq!(to_brackets(&f, &letters), want);
        assert_eq!(node_count(&f), 37);
        let h = eliminate_eps_star(&g).unwrap();
        assert!(is_eps_star_free(&h));
        assert!(!is_eps_star_free(&g));
        assert_eq!(expand_forest(&h, 1000).unwrap(), f);
        let b = balance_fslp(&g).unwrap();
        assert_eq!(expand_forest(&b, 1000).unwrap(), f);
    }

    #[test]
    fn hash_matches_tokens() {
        let alg = ForestHash::new(3, 1_000_003);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = random_fslp(3, 40, 300, &mut rng);
            let f = expand_forest(&g, 10_000).unwrap();
            match g.evaluate(&alg).unwrap() {
                HashValue::Forest { hash, len } => {
                    assert_eq!(len as usize, f.len());
                    assert_eq!(hash, forest_hash(&f, alg.base, alg.modulus));
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn base_verifies() {
        let rep = verify_subsumption_base(&ForestBase::new(2), &ForestAlgebra { alphabet_size: 2 }, 60, 5);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(rep.samples >= 1000);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let g = random_fslp(3, 60, 2000, &mut rng);
            let f = expand_forest(&g, 1 << 20).unwrap();
            match eliminate_eps_star(&g) {
                Ok(h) => {
                    assert!(is_eps_star_free(&h));
                    assert_eq!(expand_forest(&h, 1 << 20).unwrap(), f);
                    let b = balance_fslp(&g).unwrap();
                    assert_eq!(expand_forest(&b, 1 << 20).unwrap(), f);
                }
                Err(Error::EmptyForest) => assert!(f.is_empty()),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn empty_forest_is_rejected() {
        let rules = vec![Term::constant(EPS), app(H00, Term::Leaf(0), Term::Leaf(0))];
        let g = GammaSlp::infer(Arc::new(forest_signature(1)), rules, 1).unwrap();
        assert_eq!(expand_forest(&g, 10).unwrap(), vec![]);
        assert!(matches!(eliminate_eps_star(&g), Err(Error::EmptyForest)));
    }

    #[test]
    fn text_round_trip() {
        let (g, letters) = example_fslp(3);
        let s = write_fslp(&g, &letters);
        let (h, l2) = parse_fslp(&s).unwrap();
        assert_eq!(l2, letters);
        assert_eq!(h.rules, g.rules);
        assert!(parse_fslp(&s.replace("alphabet 3", "alphabet 2")).is_err());
    }
}
