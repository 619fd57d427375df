//! The cluster algebra: trees with a top boundary node and optionally one
//! bottom boundary leaf, merged horizontally and vertically. Top dags are
//! grammars over it.

use super::{parse_alphabet, write_alphabet};
use crate::algebra::{
    balance_circuit, parse_body, write_body, Algebra, Context, CtxLeaf, GammaSlp, Sampler, Side, Signature, SortId,
    SubsumptionBase, SymbolId, Term,
};
use crate::error::{Error, Result};
use crate::sslp::text::{lines, perr};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Largest alphabet for which the signature is built; it has `k + 5k^2 + k^3` symbols.
pub const MAX_CLUSTER_ALPHABET: u32 = 64;

/// Sort arithmetic and symbol numbering for an alphabet of size `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub k: u32,
}

/// Sort of a cluster: its root label and, for rank one, the bottom label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterSort {
    pub top: u32,
    pub bottom: Option<u32>,
}

impl Layout {
    pub fn sort_id(&self, s: ClusterSort) -> SortId {
        match s.bottom {
            None => s.top,
            Some(b) => self.k + s.top * self.k + b,
        }
    }

    pub fn sort_of(&self, id: SortId) -> ClusterSort {
        if id < self.k {
            ClusterSort { top: id, bottom: None }
        } else {
            let r = id - self.k;
            ClusterSort { top: r / self.k, bottom: Some(r % self.k) }
        }
    }

    fn k2(&self) -> u32 {
        self.k * self.k
    }

    /// `a(u) | a(v) = a(u v)` for rank-zero `a(u)`, `a(v)`.
    pub fn hmerge00(&self, a: u32) -> SymbolId {
        a
    }

    /// rank zero with root `a`, then rank one `ab`.
    pub fn hmerge01(&self, a: u32, b: u32) -> SymbolId {
        self.k + a * self.k + b
    }

    pub fn hmerge10(&self, a: u32, b: u32) -> SymbolId {
        self.k + self.k2() + a * self.k + b
    }

    /// `ab` above `b`.
    pub fn vmerge0(&self, a: u32, b: u32) -> SymbolId {
        self.k + 2 * self.k2() + a * self.k + b
    }

    /// `ab` above `bc`.
    pub fn vmerge1(&self, a: u32, b: u32, c: u32) -> SymbolId {
        self.k + 3 * self.k2() + (a * self.k + b) * self.k + c
    }

    /// The constant `a(b)`.
    pub fn leaf(&self, a: u32, b: u32) -> SymbolId {
        self.k + 3 * self.k2() + self.k2() * self.k + a * self.k + b
    }

    /// The constant `a(b)` with `b` the bottom boundary.
    pub fn edge(&self, a: u32, b: u32) -> SymbolId {
        self.k + 4 * self.k2() + self.k2() * self.k + a * self.k + b
    }

    pub fn symbol_count(&self) -> u32 {
        self.k + 5 * self.k2() + self.k2() * self.k
    }

    /// The horizontal merge taking these argument sorts.
    pub fn hmerge(&self, l: ClusterSort, r: ClusterSort) -> Result<SymbolId> {
        match (l.bottom, r.bottom) {
            _ if l.top != r.top => Err(Error::SortMismatch(format!("merging roots {} and {}", l.top, r.top))),
            (None, None) => Ok(self.hmerge00(l.top)),
            (None, Some(b)) => Ok(self.hmerge01(l.top, b)),
            (Some(b), None) => Ok(self.hmerge10(l.top, b)),
            (Some(_), Some(_)) => Err(Error::SortMismatch("two bottom boundaries".into())),
        }
    }

    /// The vertical merge taking these argument sorts.
    pub fn vmerge(&self, up: ClusterSort, down: ClusterSort) -> Result<SymbolId> {
        match (up.bottom, down.bottom) {
            (Some(b), _) if b != down.top => Err(Error::SortMismatch(format!("bottom {b} above root {}", down.top))),
            (Some(b), None) => Ok(self.vmerge0(up.top, b)),
            (Some(b), Some(c)) => Ok(self.vmerge1(up.top, b, c)),
            (None, _) => Err(Error::SortMismatch("no bottom boundary".into())),
        }
    }

    pub fn hmerge_sort(l: ClusterSort, r: ClusterSort) -> ClusterSort {
        ClusterSort { top: l.top, bottom: l.bottom.or(r.bottom) }
    }

    pub fn vmerge_sort(up: ClusterSort, down: ClusterSort) -> ClusterSort {
        ClusterSort { top: up.top, bottom: down.bottom }
    }

    /// What a symbol is.
    pub fn decode(&self, f: SymbolId) -> Option<ClusterOp> {
        let (k, k2) = (self.k, self.k2());
        let mut r = f;
        if r < k {
            return Some(ClusterOp::HMerge00(r));
        }
        r -= k;
        if r < k2 {
            return Some(ClusterOp::HMerge01(r / k, r % k));
        }
        r -= k2;
        if r < k2 {
            return Some(ClusterOp::HMerge10(r / k, r % k));
        }
        r -= k2;
        if r < k2 {
            return Some(ClusterOp::VMerge0(r / k, r % k));
        }
        r -= k2;
        if r < k2 * k {
            return Some(ClusterOp::VMerge1(r / k2, (r / k) % k, r % k));
        }
        r -= k2 * k;
        if r < k2 {
            return Some(ClusterOp::Leaf(r / k, r % k));
        }
        r -= k2;
        if r < k2 {
            return Some(ClusterOp::Edge(r / k, r % k));
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterOp {
    HMerge00(u32),
    HMerge01(u32, u32),
    HMerge10(u32, u32),
    VMerge0(u32, u32),
    VMerge1(u32, u32, u32),
    Leaf(u32, u32),
    Edge(u32, u32),
}

pub fn cluster_signature(k: u32) -> Result<Signature> {
    if k == 0 || k > MAX_CLUSTER_ALPHABET {
        return Err(Error::Domain(format!("cluster alphabet size {k} outside 1..={MAX_CLUSTER_ALPHABET}")));
    }
    let lay = Layout { k };
    let s = |top, bottom| lay.sort_id(ClusterSort { top, bottom });
    let mut types = Vec::with_capacity(lay.symbol_count() as usize);
    let mut names = Vec::with_capacity(lay.symbol_count() as usize);
    for f in 0..lay.symbol_count() {
        let (t, n) = match lay.decode(f).unwrap() {
            ClusterOp::HMerge00(a) => (vec![s(a, None); 3], format!("h{a}")),
            ClusterOp::HMerge01(a, b) => (vec![s(a, None), s(a, Some(b)), s(a, Some(b))], format!("h{a}_{a}{b}")),
            ClusterOp::HMerge10(a, b) => (vec![s(a, Some(b)), s(a, None), s(a, Some(b))], format!("h{a}{b}_{a}")),
            ClusterOp::VMerge0(a, b) => (vec![s(a, Some(b)), s(b, None), s(a, None)], format!("v{a}{b}_{b}")),
            ClusterOp::VMerge1(a, b, c) => (vec![s(a, Some(b)), s(b, Some(c)), s(a, Some(c))], format!("v{a}{b}_{b}{c}")),
            ClusterOp::Leaf(a, b) => (vec![s(a, None)], format!("l{a}_{b}")),
            ClusterOp::Edge(a, b) => (vec![s(a, Some(b))], format!("e{a}_{b}")),
        };
        types.push(t);
        names.push(n);
    }
    Signature::new(k + k * k, types, names)
}

/// Alphabet size of a cluster signature.
pub fn cluster_alphabet(sig: &Signature) -> Result<u32> {
    let not = || Error::SortMismatch("not a cluster signature".into());
    let k = (1..=MAX_CLUSTER_ALPHABET).find(|&k| k + k * k == sig.sort_count).ok_or_else(not)?;
    let lay = Layout { k };
    if sig.symbol_count() != lay.symbol_count() as usize {
        return Err(not());
    }
    let want = cluster_signature(k)?;
    if want.types != sig.types {
        return Err(not());
    }
    Ok(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CTok {
    Open(u32),
    Close,
    /// the bottom boundary leaf
    Bottom(u32),
}

/// Root label and bottom label of a token sequence, if it is a cluster.
pub fn cluster_sort(v: &[CTok]) -> Option<ClusterSort> {
    let top = match (v.first(), v.last()) {
        (Some(CTok::Open(a)), Some(CTok::Close)) if v.len() > 2 => *a,
        _ => return None,
    };
    let mut bottom = None;
    let mut depth = 0i64;
    for (i, t) in v.iter().enumerate() {
        match t {
            CTok::Open(_) => depth += 1,
            CTok::Close => depth -= 1,
            CTok::Bottom(b) => {
                if bottom.is_some() {
                    return None;
                }
                bottom = Some(*b);
            }
        }
        if depth == 0 && i + 1 != v.len() {
            return None;
        }
    }
    (depth == 0).then_some(ClusterSort { top, bottom })
}

/// Bracket notation; the bottom boundary is written `_b`.
pub fn to_brackets(v: &[CTok], letters: &[String]) -> String {
    let name = |a: u32| letters.get(a as usize).map_or("?", |l| l.as_str());
    let mut s = String::new();
    let mut first = true;
    for (i, t) in v.iter().enumerate() {
        match *t {
            CTok::Open(a) => {
                if !first {
                    s.push(' ');
                }
                s.push_str(name(a));
                first = v.get(i + 1) != Some(&CTok::Close);
                if first {
                    s.push('(');
                }
            }
            CTok::Bottom(b) => {
                if !first {
                    s.push(' ');
                }
                s.push('_');
                s.push_str(name(b));
                first = false;
            }
            CTok::Close => {
                if !matches!(i.checked_sub(1).map(|j| v[j]), Some(CTok::Open(_))) {
                    s.push(')');
                }
                first = false;
            }
        }
    }
    s
}

pub fn cluster_node_count(v: &[CTok]) -> usize {
    v.iter().filter(|t| !matches!(t, CTok::Close)).count()
}

/// Clusters as token sequences.
#[derive(Clone, Debug)]
pub struct ClusterAlgebra {
    layout: Layout,
}

impl ClusterAlgebra {
    pub fn new(k: u32) -> Self {
        ClusterAlgebra { layout: Layout { k } }
    }
}

impl Algebra for ClusterAlgebra {
    type Value = Vec<CTok>;

    fn apply(&self, f: SymbolId, args: &[Vec<CTok>]) -> Result<Vec<CTok>> {
        let lay = &self.layout;
        let op = lay.decode(f).ok_or_else(|| Error::Domain(format!("unknown symbol {f}")))?;
        let sorts: Vec<Option<ClusterSort>> = args.iter().map(|a| cluster_sort(a)).collect();
        let s = |top, bottom| Some(ClusterSort { top, bottom });
        let want: Vec<Option<ClusterSort>> = match op {
            ClusterOp::HMerge00(a) => vec![s(a, None), s(a, None)],
            ClusterOp::HMerge01(a, b) => vec![s(a, None), s(a, Some(b))],
            ClusterOp::HMerge10(a, b) => vec![s(a, Some(b)), s(a, None)],
            ClusterOp::VMerge0(a, b) => vec![s(a, Some(b)), s(b, None)],
            ClusterOp::VMerge1(a, b, c) => vec![s(a, Some(b)), s(b, Some(c))],
            ClusterOp::Leaf(..) | ClusterOp::Edge(..) => vec![],
        };
        if sorts != want {
            return Err(Error::Domain(format!("symbol {f} on clusters of sorts {sorts:?}")));
        }
        Ok(match op {
            ClusterOp::HMerge00(_) | ClusterOp::HMerge01(..) | ClusterOp::HMerge10(..) => {
                let (u, v) = (&args[0], &args[1]);
                [&u[..u.len() - 1], &v[1..]].concat()
            }
            ClusterOp::VMerge0(..) | ClusterOp::VMerge1(..) => {
                let p = args[0].iter().position(|t| matches!(t, CTok::Bottom(_))).unwrap();
                [&args[0][..p], args[1].as_slice(), &args[0][p + 1..]].concat()
            }
            ClusterOp::Leaf(a, b) => vec![CTok::Open(a), CTok::Open(b), CTok::Close, CTok::Close],
            ClusterOp::Edge(a, b) => vec![CTok::Open(a), CTok::Bottom(b), CTok::Close],
        })
    }
}

impl Sampler for ClusterAlgebra {
    fn sample(&self, sort: SortId, rng: &mut ChaCha8Rng) -> Vec<CTok> {
        let k = self.layout.k;
        let ClusterSort { top, bottom } = self.layout.sort_of(sort);
        // a root with a random forest of 1..=11 nodes below it
        let n = rng.random_range(1..=11usize);
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for i in 1..=n {
            children[rng.random_range(0..i)].push(i);
        }
        let mut labels: Vec<u32> = (0..=n).map(|_| rng.random_range(0..k)).collect();
        labels[0] = top;
        let boundary = bottom.map(|b| {
            let leaves: Vec<usize> = (1..=n).filter(|&v| children[v].is_empty()).collect();
            let v = leaves[rng.random_range(0..leaves.len())];
            labels[v] = b;
            v
        });
        fn emit(v: usize, ch: &[Vec<usize>], labels: &[u32], bnd: Option<usize>, out: &mut Vec<CTok>) {
            if Some(v) == bnd {
                out.push(CTok::Bottom(labels[v]));
                return;
            }
            out.push(CTok::Open(labels[v]));
            for &c in &ch[v] {
                emit(c, ch, labels, bnd, out);
            }
            out.push(CTok::Close);
        }
        let mut out = Vec::new();
        emit(0, &children, &labels, boundary, &mut out);
        out
    }
}

/// Node counts, saturating.
struct NodeCount(Layout);

impl Algebra for NodeCount {
    type Value = u64;

    fn apply(&self, f: SymbolId, args: &[u64]) -> Result<u64> {
        Ok(match self.0.decode(f) {
            Some(ClusterOp::Leaf(..) | ClusterOp::Edge(..)) => 2,
            // the shared root, or the boundary leaf that becomes the lower root
            _ => args[0].saturating_add(args[1]) - 1,
        })
    }
}

/// Tokens of the produced cluster; `cap` bounds the node count.
pub fn expand_cluster(g: &GammaSlp, cap: u64) -> Result<Vec<CTok>> {
    let k = cluster_alphabet(&g.signature)?;
    if g.evaluate(&NodeCount(Layout { k }))? > cap {
        return Err(Error::CapExceeded(cap));
    }
    g.evaluate(&ClusterAlgebra::new(k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tail {
    None,
    /// a rank-zero cluster below the hole
    Sigma,
    /// a rank-one cluster below the hole, with this bottom label
    Tau(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitSide {
    /// the sibling cluster carrying the bottom boundary is on the left
    Left,
    Right,
}

/// A base context, read from the hole outwards:
/// `t4 . (t3 | (t1 . ((s1 | hole | s2) . tail)))`, each part optional,
/// `t3` on either side, with the labels fixing every sort.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterShape {
    pub hole: ClusterSort,
    pub s1: bool,
    pub s2: bool,
    pub tail: Tail,
    /// root label of `t1`
    pub t1: Option<u32>,
    /// side and bottom label of `t3`
    pub split: Option<(SplitSide, u32)>,
    /// root label of `t4`
    pub t4: Option<u32>,
}

/// Parameter slots of a shape, in aux order.
struct Slots<L> {
    s1: Option<Term<L>>,
    s2: Option<Term<L>>,
    tail: Option<Term<L>>,
    t1: Option<Term<L>>,
    t3: Option<Term<L>>,
    t4: Option<Term<L>>,
}

impl<L: Clone> Slots<L> {
    fn from_vec(e: &ClusterShape, v: Vec<Term<L>>) -> Self {
        let mut it = v.into_iter();
        let mut take = |p: bool| if p { it.next() } else { None };
        Slots {
            s1: take(e.s1),
            s2: take(e.s2),
            tail: take(e.tail != Tail::None),
            t1: take(e.t1.is_some()),
            t3: take(e.split.is_some()),
            t4: take(e.t4.is_some()),
        }
    }

    fn into_vec(self) -> Vec<Term<L>> {
        [self.s1, self.s2, self.tail, self.t1, self.t3, self.t4].into_iter().flatten().collect()
    }
}

/// One layer wrapped around a context.
#[derive(Clone, Copy, Debug)]
enum Step {
    /// rank-zero cluster merged on the left
    LeftSigma,
    RightSigma,
    /// rank-one cluster of this bottom label merged on the left
    LeftTau(u32),
    RightTau(u32),
    /// cluster plugged into the bottom boundary, with its bottom label if any
    Below(Option<u32>),
    /// rank-one cluster with this root label placed on top
    Above(u32),
}

impl ClusterShape {
    fn core(&self) -> ClusterSort {
        self.hole
    }

    /// Sort after the tail.
    fn low(&self) -> ClusterSort {
        match self.tail {
            Tail::None => self.hole,
            Tail::Sigma => ClusterSort { top: self.hole.top, bottom: None },
            Tail::Tau(d) => ClusterSort { top: self.hole.top, bottom: Some(d) },
        }
    }

    fn mid(&self) -> ClusterSort {
        let low = self.low();
        ClusterSort { top: self.t1.unwrap_or(low.top), bottom: low.bottom }
    }

    fn split_sort(&self) -> ClusterSort {
        let mid = self.mid();
        match self.split {
            Some((_, e)) => ClusterSort { top: mid.top, bottom: Some(e) },
            None => mid,
        }
    }

    pub fn result(&self) -> ClusterSort {
        let s = self.split_sort();
        ClusterSort { top: self.t4.unwrap_or(s.top), ..s }
    }

    fn valid(&self) -> bool {
        let tail_ok = match self.tail {
            Tail::None => true,
            Tail::Sigma | Tail::Tau(_) => self.hole.bottom.is_some(),
        };
        let split_ok = self.split.is_none() || self.mid().bottom.is_none();
        tail_ok && split_ok && (self.t4.is_none() || self.split.is_some())
    }

    fn param_sorts(&self) -> Slots<ClusterSort> {
        let leaf = |s: ClusterSort| Some(Term::Leaf(s));
        let core = self.core();
        let mid = self.mid();
        let s0 = ClusterSort { top: core.top, bottom: None };
        Slots {
            s1: if self.s1 { leaf(s0) } else { None },
            s2: if self.s2 { leaf(s0) } else { None },
            tail: match (self.tail, core.bottom) {
                (Tail::Sigma, Some(c)) => leaf(ClusterSort { top: c, bottom: None }),
                (Tail::Tau(d), Some(c)) => leaf(ClusterSort { top: c, bottom: Some(d) }),
                _ => None,
            },
            t1: self.t1.and_then(|a| leaf(ClusterSort { top: a, bottom: Some(core.top) })),
            t3: self.split.and_then(|(_, e)| leaf(ClusterSort { top: mid.top, bottom: Some(e) })),
            t4: self.t4.and_then(|f| leaf(ClusterSort { top: f, bottom: Some(mid.top) })),
        }
    }

    /// The shape after wrapping `step` around it, with parameters rewritten.
    fn extend<L: Clone>(
        &self,
        lay: &Layout,
        params: Vec<Term<L>>,
        step: Step,
        p: Term<L>,
    ) -> Result<(ClusterShape, Vec<Term<L>>)> {
        let mut e = *self;
        let mut sl = Slots::from_vec(self, params);
        let sorts = self.param_sorts();
        let srt = |t: &Option<Term<ClusterSort>>| match t {
            Some(Term::Leaf(s)) => *s,
            _ => unreachable!("present slot"),
        };
        let res = self.result();
        let mismatch = || Error::BaseMismatch(format!("cannot wrap {step:?} around {self:?}"));
        let h = |l: Term<L>, ls: ClusterSort, r: Term<L>, rs: ClusterSort| -> Result<Term<L>> {
            Ok(Term::app(lay.hmerge(ls, rs)?, vec![l, r]))
        };
        let v = |u: Term<L>, us: ClusterSort, d: Term<L>, ds: ClusterSort| -> Result<Term<L>> {
            Ok(Term::app(lay.vmerge(us, ds)?, vec![u, d]))
        };
        match step {
            Step::LeftSigma | Step::RightSigma => {
                let left = matches!(step, Step::LeftSigma);
                let ps = ClusterSort { top: res.top, bottom: None };
                // the parameter owning the root of the whole context
                if let Some(t4) = sl.t4.take() {
                    let s4 = srt(&sorts.t4);
                    sl.t4 = Some(if left { h(p, ps, t4, s4)? } else { h(t4, s4, p, ps)? });
                } else if let Some((side, _)) = e.split.filter(|&(side, _)| (side == SplitSide::Left) == left) {
                    let t3 = sl.t3.take().unwrap();
                    let s3 = srt(&sorts.t3);
                    sl.t3 = Some(if side == SplitSide::Left { h(p, ps, t3, s3)? } else { h(t3, s3, p, ps)? });
                } else if let Some(t1) = sl.t1.take() {
                    let s1 = srt(&sorts.t1);
                    sl.t1 = Some(if left { h(p, ps, t1, s1)? } else { h(t1, s1, p, ps)? });
                } else if left {
                    sl.s1 = Some(match sl.s1.take() {
                        Some(s) => h(p, ps, s, ps)?,
                        None => p,
                    });
                    e.s1 = true;
                } else {
                    sl.s2 = Some(match sl.s2.take() {
                        Some(s) => h(s, ps, p, ps)?,
                        None => p,
                    });
                    e.s2 = true;
                }
            }
            Step::LeftTau(b) | Step::RightTau(b) => {
                if res.bottom.is_some() {
                    return Err(mismatch());
                }
                let side = if matches!(step, Step::LeftTau(_)) { SplitSide::Left } else { SplitSide::Right };
                e.split = Some((side, b));
                sl.t3 = Some(p);
            }
            Step::Above(f) => {
                if e.split.is_some() {
                    let ps = ClusterSort { top: f, bottom: Some(res.top) };
                    sl.t4 = Some(match sl.t4.take() {
                        Some(t4) => v(p, ps, t4, srt(&sorts.t4))?,
                        None => p,
                    });
                    e.t4 = Some(f);
                } else {
                    let ps = ClusterSort { top: f, bottom: Some(res.top) };
                    sl.t1 = Some(match sl.t1.take() {
                        Some(t1) => v(p, ps, t1, srt(&sorts.t1))?,
                        None => p,
                    });
                    e.t1 = Some(f);
                }
            }
            Step::Below(pb) => {
                let Some(b) = res.bottom else { return Err(mismatch()) };
                let ps = ClusterSort { top: b, bottom: pb };
                if let Some((side, _)) = e.split {
                    let t3 = sl.t3.take().unwrap();
                    let s3 = srt(&sorts.t3);
                    let lower = v(t3, s3, p, ps)?;
                    let ls = Layout::vmerge_sort(s3, ps);
                    if let Some(b) = pb {
                        sl.t3 = Some(lower);
                        e.split = Some((side, b));
                    } else {
                        // the sibling becomes rank zero and joins the middle part
                        e.split = None;
                        let left = side == SplitSide::Left;
                        let t4 = sl.t4.take();
                        e.t4 = None;
                        if let Some(t1) = sl.t1.take() {
                            let s1 = srt(&sorts.t1);
                            let merged = if left { h(lower, ls, t1, s1)? } else { h(t1, s1, lower, ls)? };
                            sl.t1 = Some(match t4 {
                                Some(t4) => v(t4, srt(&sorts.t4), merged, s1)?,
                                None => merged,
                            });
                        } else {
                            let s0 = ClusterSort { top: self.core().top, bottom: None };
                            if left {
                                sl.s1 = Some(match sl.s1.take() {
                                    Some(s) => h(lower, ls, s, s0)?,
                                    None => lower,
                                });
                                e.s1 = true;
                            } else {
                                sl.s2 = Some(match sl.s2.take() {
                                    Some(s) => h(s, s0, lower, ls)?,
                                    None => lower,
                                });
                                e.s2 = true;
                            }
                            sl.t1 = t4;
                        }
                        e.t1 = self.t4.or(self.t1);
                    }
                } else {
                    match (e.tail, sl.tail.take()) {
                        (Tail::Tau(_), Some(t2)) => {
                            sl.tail = Some(v(t2, srt(&sorts.tail), p, ps)?);
                        }
                        (Tail::None, None) => sl.tail = Some(p),
                        _ => return Err(mismatch()),
                    }
                    e.tail = match pb {
                        Some(d) => Tail::Tau(d),
                        None => Tail::Sigma,
                    };
                }
            }
        }
        debug_assert!(e.valid(), "{e:?}");
        Ok((e, sl.into_vec()))
    }

    /// The wrapping steps that build this shape around a bare hole, in aux order.
    fn steps(&self) -> Vec<Step> {
        let side = |(side, e)| match side {
            SplitSide::Left => Step::LeftTau(e),
            SplitSide::Right => Step::RightTau(e),
        };
        [
            self.s1.then_some(Step::LeftSigma),
            self.s2.then_some(Step::RightSigma),
            (self.tail != Tail::None).then_some(Step::Below(self.low().bottom)),
            self.t1.map(Step::Above),
            self.split.map(side),
            self.t4.map(Step::Above),
        ]
        .into_iter()
        .flatten()
        .collect()
    }

    fn bare(hole: ClusterSort) -> Self {
        ClusterShape { hole, s1: false, s2: false, tail: Tail::None, t1: None, split: None, t4: None }
    }
}

/// Subsumption base with shapes generated on demand from their labels.
#[derive(Clone, Debug)]
pub struct ClusterBase {
    layout: Layout,
    signature: Signature,
}

impl ClusterBase {
    pub fn new(k: u32) -> Result<Self> {
        Ok(ClusterBase { layout: Layout { k }, signature: cluster_signature(k)? })
    }
}

impl SubsumptionBase for ClusterBase {
    type Elem = ClusterShape;

    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn context(&self, e: &ClusterShape) -> Context {
        let lay = &self.layout;
        let ps = e.param_sorts();
        let mut next = 0;
        let mut aux = || {
            next += 1;
            Term::Leaf(CtxLeaf::Aux(next - 1))
        };
        let srt = |t: &Option<Term<ClusterSort>>| match t {
            Some(Term::Leaf(s)) => *s,
            _ => unreachable!("present slot"),
        };
        let h = |l, ls, r, rs| Term::app(lay.hmerge(ls, rs).expect("consistent shape"), vec![l, r]);
        let v = |u, us, d, ds| Term::app(lay.vmerge(us, ds).expect("consistent shape"), vec![u, d]);
        let mut t = Term::Leaf(CtxLeaf::Hole);
        let mut ts = e.hole;
        if e.s1 {
            let s = srt(&ps.s1);
            t = h(aux(), s, t, ts);
            ts = Layout::hmerge_sort(s, ts);
        }
        if e.s2 {
            let s = srt(&ps.s2);
            t = h(t, ts, aux(), s);
            ts = Layout::hmerge_sort(ts, s);
        }
        if e.tail != Tail::None {
            let s = srt(&ps.tail);
            t = v(t, ts, aux(), s);
            ts = Layout::vmerge_sort(ts, s);
        }
        if e.t1.is_some() {
            let s = srt(&ps.t1);
            t = v(aux(), s, t, ts);
            ts = Layout::vmerge_sort(s, ts);
        }
        if let Some((side, _)) = e.split {
            let s = srt(&ps.t3);
            t = match side {
                SplitSide::Left => h(aux(), s, t, ts),
                SplitSide::Right => h(t, ts, aux(), s),
            };
            ts = Layout::hmerge_sort(s, ts);
        }
        if e.t4.is_some() {
            let s = srt(&ps.t4);
            t = v(aux(), s, t, ts);
            ts = Layout::vmerge_sort(s, ts);
        }
        debug_assert_eq!(ts, e.result());
        Context {
            term: t,
            hole_sort: lay.sort_id(e.hole),
            result_sort: lay.sort_id(ts),
            aux_sorts: ps.into_vec().into_iter().map(|s| lay.sort_id(srt(&Some(s)))).collect(),
        }
    }

    fn subsume_atomic(&self, symbol: SymbolId, hole: usize) -> Result<(ClusterShape, Vec<Term<u32>>)> {
        let lay = &self.layout;
        let op = lay.decode(symbol).ok_or_else(|| Error::BaseMismatch(format!("unknown symbol {symbol}")))?;
        let s = |top, bottom| ClusterSort { top, bottom };
        let (hole_sort, step) = match (op, hole) {
            (ClusterOp::HMerge00(a), 0) => (s(a, None), Step::RightSigma),
            (ClusterOp::HMerge00(a), 1) => (s(a, None), Step::LeftSigma),
            (ClusterOp::HMerge01(a, b), 0) => (s(a, None), Step::RightTau(b)),
            (ClusterOp::HMerge01(a, b), 1) => (s(a, Some(b)), Step::LeftSigma),
            (ClusterOp::HMerge10(a, b), 0) => (s(a, Some(b)), Step::RightSigma),
            (ClusterOp::HMerge10(a, b), 1) => (s(a, None), Step::LeftTau(b)),
            (ClusterOp::VMerge0(a, b), 0) => (s(a, Some(b)), Step::Below(None)),
            (ClusterOp::VMerge0(a, b), 1) => (s(b, None), Step::Above(a)),
            (ClusterOp::VMerge1(a, b, c), 0) => (s(a, Some(b)), Step::Below(Some(c))),
            (ClusterOp::VMerge1(a, b, c), 1) => (s(b, Some(c)), Step::Above(a)),
            _ => return Err(Error::BaseMismatch(format!("no atomic context for symbol {symbol} at {hole}"))),
        };
        ClusterShape::bare(hole_sort).extend(lay, Vec::new(), step, Term::Leaf(0))
    }

    fn compose(&self, outer: &ClusterShape, inner: &ClusterShape) -> Result<(ClusterShape, Vec<Term<Side>>)> {
        if inner.result() != outer.hole {
            return Err(Error::BaseMismatch(format!("cannot plug {inner:?} into {outer:?}")));
        }
        let mut cur = *inner;
        let mut params: Vec<Term<Side>> =
            (0..inner.param_sorts().into_vec().len() as u32).map(|i| Term::Leaf(Side::Inner(i))).collect();
        for (i, step) in outer.steps().into_iter().enumerate() {
            let (next, p) = cur.extend(&self.layout, params, step, Term::Leaf(Side::Outer(i as u32)))?;
            cur = next;
            params = p;
        }
        Ok((cur, params))
    }

    fn elements(&self) -> Vec<ClusterShape> {
        let k = self.layout.k;
        let opt = |v: &mut Vec<Option<u32>>| {
            v.push(None);
            v.extend((0..k).map(Some));
        };
        let mut labels = Vec::new();
        opt(&mut labels);
        let mut out = Vec::new();
        for top in 0..k {
            for &bottom in &labels {
                let hole = ClusterSort { top, bottom };
                let tails: Vec<Tail> = if bottom.is_some() {
                    std::iter::once(Tail::None).chain([Tail::Sigma]).chain((0..k).map(Tail::Tau)).collect()
                } else {
                    vec![Tail::None]
                };
                for m in 0..4u8 {
                    for &tail in &tails {
                        for &t1 in &labels {
                            let mut splits = vec![None];
                            for e in 0..k {
                                splits.push(Some((SplitSide::Left, e)));
                                splits.push(Some((SplitSide::Right, e)));
                            }
                            for &split in &splits {
                                for &t4 in &labels {
                                    let e = ClusterShape { hole, s1: m & 1 != 0, s2: m & 2 != 0, tail, t1, split, t4 };
                                    if e.valid() && e != ClusterShape::bare(hole) {
                                        out.push(e);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Balances a top dag to logarithmic depth.
pub fn balance_top_dag(g: &GammaSlp) -> Result<GammaSlp> {
    let k = cluster_alphabet(&g.signature)?;
    g.validate()?;
    if g.sorts[g.start as usize] >= k {
        return Err(Error::SortMismatch("start variable must produce a rank-zero cluster".into()));
    }
    balance_circuit(g, &ClusterBase::new(k)?)
}

pub fn write_top_dag(g: &GammaSlp, letters: &[String]) -> String {
    let mut s = String::new();
    write_alphabet("TOPDAG 1", letters, &mut s);
    write_body(g, &mut s);
    s
}

pub fn parse_top_dag(src: &str) -> Result<(GammaSlp, Vec<String>)> {
    let ls = lines(src)?;
    if ls.first() != Some(&"TOPDAG 1") {
        return Err(perr(1, "expected header `TOPDAG 1`"));
    }
    let (letters, at) = parse_alphabet(&ls, 1)?;
    let want = cluster_signature(letters.len() as u32).map_err(|e| perr(2, e.to_string()))?;
    let g = parse_body(&ls, at, Some(want.names.clone()))?;
    if g.signature.types != want.types || g.signature.sort_count != want.sort_count {
        return Err(perr(at + 1, "signature does not match the cluster algebra over the alphabet"));
    }
    let g = GammaSlp { signature: Arc::new(want), ..g };
    Ok((g, letters))
}

/// `b(a^m b(a^m ... b(a^m b(c) a^m) ... a^m) a^m)` with `m = 2^n` and `2^n + 1` b's.
pub fn example_top_dag(n: u32) -> (GammaSlp, Vec<String>) {
    let lay = Layout { k: 3 };
    let (a, b, c) = (0, 1, 2);
    let l = Term::Leaf;
    let n = n as usize;
    let mut rules = vec![Term::constant(lay.leaf(b, a))];
    for i in 1..=n {
        rules.push(Term::app(lay.hmerge00(b), vec![l(i as u32 - 1), l(i as u32 - 1)]));
    }
    let xn = n as u32;
    let left = Term::app(lay.hmerge01(b, b), vec![l(xn), Term::constant(lay.edge(b, b))]);
    rules.push(Term::app(lay.hmerge10(b, b), vec![left, l(xn)]));
    for i in 1..=n {
        let y = (n + i) as u32;
        rules.push(Term::app(lay.vmerge1(b, b, b), vec![l(y), l(y)]));
    }
    let yn = 2 * n as u32 + 1;
    rules.push(Term::app(lay.vmerge0(b, b), vec![l(yn), Term::constant(lay.leaf(b, c))]));
    let start = rules.len() as u32 - 1;
    let g = GammaSlp::infer(Arc::new(cluster_signature(3).unwrap()), rules, start).expect("well formed");
    (g, vec!["a".into(), "b".into(), "c".into()])
}

/// A random top dag of at most `vars` variables producing at most `max_nodes` nodes.
pub fn random_top_dag<R: Rng>(k: u32, vars: usize, max_nodes: u64, rng: &mut R) -> GammaSlp {
    let k = k.clamp(1, MAX_CLUSTER_ALPHABET);
    let lay = Layout { k };
    let l = Term::Leaf;
    // per variable: rule, sort, node count
    let mut vs: Vec<(Term<u32>, ClusterSort, u64)> = Vec::new();
    for _ in 0..(2 * k).min(8) {
        let (a, b) = (rng.random_range(0..k), rng.random_range(0..k));
        vs.push((Term::constant(lay.leaf(a, b)), ClusterSort { top: a, bottom: None }, 2));
        vs.push((Term::constant(lay.edge(a, b)), ClusterSort { top: a, bottom: Some(b) }, 2));
    }
    let target = vars.max(vs.len() + 1);
    let mut tries = 0;
    while vs.len() < target && tries < 50 * target {
        tries += 1;
        let m = vs.len();
        let pick =
            |rng: &mut R| if rng.random_bool(0.6) { m - 1 - rng.random_range(0..m.min(8)) } else { rng.random_range(0..m) };
        let (y, z) = (pick(rng), pick(rng));
        let (sy, sz) = (vs[y].1, vs[z].1);
        let n = vs[y].2 + vs[z].2 - 1;
        if n > max_nodes {
            continue;
        }
        let (f, s) = if rng.random_bool(0.5) {
            match lay.hmerge(sy, sz) {
                Ok(f) => (f, Layout::hmerge_sort(sy, sz)),
                Err(_) => continue,
            }
        } else {
            match lay.vmerge(sy, sz) {
                Ok(f) => (f, Layout::vmerge_sort(sy, sz)),
                Err(_) => continue,
            }
        };
        vs.push((Term::app(f, vec![l(y as u32), l(z as u32)]), s, n));
    }
    let best = (0..vs.len()).filter(|&x| vs[x].1.bottom.is_none()).max_by_key(|&x| (vs[x].2, x)).unwrap();
    let rules = vs.into_iter().map(|v| v.0).collect();
    let g = GammaSlp::infer(Arc::new(cluster_signature(k).unwrap()), rules, best as u32).expect("well formed");
    g.gc().expect("acyclic").0
}
