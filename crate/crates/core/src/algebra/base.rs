use super::gslp::GammaSlp;
use super::signature::{Signature, SortId, SymbolId};
use super::term::Term;
use super::tslp::{balance_to_tslp, Tslp, TslpRule};
use super::{Algebra, Sampler};
use crate::error::{Error, Result};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Debug;
use std::hash::Hash;

/// Base contexts never exceed this many nodes.
pub const MAX_CONTEXT_NODES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CtxLeaf {
    Hole,
    Aux(u32),
}

/// A term with one hole and numbered parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub term: Term<CtxLeaf>,
    pub hole_sort: SortId,
    pub result_sort: SortId,
    pub aux_sorts: Vec<SortId>,
}

fn eval_term<A: Algebra, L>(t: &Term<L>, alg: &A, leaf: &mut impl FnMut(&L) -> Result<A::Value>) -> Result<A::Value> {
    match t {
        Term::Leaf(l) => leaf(l),
        Term::App(f, args) => {
            let a: Vec<A::Value> = args.iter().map(|x| eval_term(x, alg, leaf)).collect::<Result<_>>()?;
            alg.apply(*f, &a)
        }
    }
}

impl Context {
    /// Checks sorts, the single hole and the size limit.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        let mut holes = 0;
        let s = self.term.sort(sig, &mut |l| match *l {
            CtxLeaf::Hole => {
                holes += 1;
                Ok(self.hole_sort)
            }
            CtxLeaf::Aux(j) => {
                self.aux_sorts.get(j as usize).copied().ok_or_else(|| Error::BaseMismatch(format!("parameter {j} out of range")))
            }
        })?;
        if s != self.result_sort {
            return Err(Error::BaseMismatch(format!("context derives sort {s}, declared {}", self.result_sort)));
        }
        if holes != 1 {
            return Err(Error::BaseMismatch(format!("context has {holes} holes")));
        }
        if self.term.node_count() > MAX_CONTEXT_NODES {
            return Err(Error::BaseMismatch("context exceeds the size limit".into()));
        }
        Ok(())
    }

    pub fn eval<A: Algebra>(&self, alg: &A, hole: &A::Value, aux: &[A::Value]) -> Result<A::Value> {
        eval_term(&self.term, alg, &mut |l| match *l {
            CtxLeaf::Hole => Ok(hole.clone()),
            CtxLeaf::Aux(j) => Ok(aux[j as usize].clone()),
        })
    }
}

/// Parameter of a composed context: from the outer or the inner one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Outer(u32),
    Inner(u32),
}

/// A finite family of parameterized contexts covering all atomic contexts and
/// closed under composition, each up to a substitution of its parameters.
pub trait SubsumptionBase {
    type Elem: Clone + Eq + Hash + Debug;

    fn signature(&self) -> &Signature;

    fn context(&self, e: &Self::Elem) -> Context;

    /// The element for `f(..., x, ...)` with the hole at `hole`; parameter `j`
    /// becomes a term over the indices of the remaining arguments.
    fn subsume_atomic(&self, symbol: SymbolId, hole: usize) -> Result<(Self::Elem, Vec<Term<u32>>)>;

    /// The element for `outer[inner]`.
    fn compose(&self, outer: &Self::Elem, inner: &Self::Elem) -> Result<(Self::Elem, Vec<Term<Side>>)>;

    /// All elements, or a representative family when the base is large.
    fn elements(&self) -> Vec<Self::Elem>;
}

struct Out<'a> {
    sig: &'a Signature,
    rules: Vec<Term<u32>>,
    sorts: Vec<SortId>,
}

impl Out<'_> {
    /// Adds a rule for `t` unless it is a bare variable.
    fn materialize(&mut self, t: Term<u32>, want: SortId) -> Result<u32> {
        let got = t.sort(self.sig, &mut |&y| Ok(self.sorts[y as usize])).map_err(|e| match e {
            Error::SortMismatch(m) => Error::BaseMismatch(m),
            e => e,
        })?;
        if got != want {
            return Err(Error::BaseMismatch(format!("substitution derives sort {got}, expected {want}")));
        }
        Ok(match t {
            Term::Leaf(v) => v,
            t => {
                self.rules.push(t);
                self.sorts.push(want);
                self.rules.len() as u32 - 1
            }
        })
    }
}

fn leaf_at<T: Clone>(v: &[T], i: u32) -> Result<T> {
    v.get(i as usize).cloned().ok_or_else(|| Error::BaseMismatch(format!("substitution refers to missing parameter {i}")))
}

/// Turns a term/context program into a plain grammar using the base to
/// represent every context variable by a base element plus parameters.
pub fn tslp_to_slp<B: SubsumptionBase>(t: &Tslp, base: &B) -> Result<GammaSlp> {
    let order = t.topo_order()?;
    let sig = &*t.signature;
    if base.signature() != sig {
        return Err(Error::BaseMismatch("base is for a different signature".into()));
    }
    let mut out = Out { sig, rules: Vec::new(), sorts: Vec::new() };
    let mut tree = vec![u32::MAX; t.var_count()];
    let mut ctx: Vec<Option<(B::Elem, Vec<u32>)>> = vec![None; t.var_count()];

    let checked = |e: &B::Elem, hole: SortId, result: SortId| -> Result<Context> {
        let c = base.context(e);
        c.check(sig)?;
        if c.hole_sort != hole || c.result_sort != result {
            return Err(Error::BaseMismatch(format!("{e:?} has the wrong type")));
        }
        Ok(c)
    };

    fn combine<B: SubsumptionBase>(
        base: &B,
        out: &mut Out,
        outer: &(B::Elem, Vec<u32>),
        inner: &(B::Elem, Vec<u32>),
        checked: &impl Fn(&B::Elem, SortId, SortId) -> Result<Context>,
    ) -> Result<(B::Elem, Vec<u32>)> {
        let (co, ci) = (base.context(&outer.0), base.context(&inner.0));
        let (e, subst) = base.compose(&outer.0, &inner.0)?;
        let c = checked(&e, ci.hole_sort, co.result_sort)?;
        if subst.len() != c.aux_sorts.len() {
            return Err(Error::BaseMismatch(format!("{e:?} needs {} parameters", c.aux_sorts.len())));
        }
        let mut params = Vec::with_capacity(subst.len());
        for (s, &want) in subst.iter().zip(&c.aux_sorts) {
            let term = s.try_subst(&mut |side| {
                Ok(Term::Leaf(match *side {
                    Side::Outer(j) => leaf_at(&outer.1, j)?,
                    Side::Inner(j) => leaf_at(&inner.1, j)?,
                }))
            })?;
            params.push(out.materialize(term, want)?);
        }
        Ok((e, params))
    }

    fn fold<B: SubsumptionBase>(
        base: &B,
        out: &mut Out,
        items: &[(B::Elem, Vec<u32>)],
        checked: &impl Fn(&B::Elem, SortId, SortId) -> Result<Context>,
    ) -> Result<(B::Elem, Vec<u32>)> {
        if items.len() == 1 {
            return Ok(items[0].clone());
        }
        let mid = items.len() / 2;
        let l = fold(base, out, &items[..mid], checked)?;
        let r = fold(base, out, &items[mid..], checked)?;
        combine(base, out, &l, &r, checked)
    }

    for x in order {
        let x = x as usize;
        match &t.rules[x] {
            TslpRule::Symbol { symbol, args } => {
                let term = Term::App(*symbol, args.iter().map(|&a| Term::Leaf(tree[a as usize])).collect());
                tree[x] = out.materialize(term, sig.result_sort(*symbol))?;
            }
            TslpRule::Atomic { symbol, hole, args } => {
                let (e, subst) = base.subsume_atomic(*symbol, *hole)?;
                let c = checked(&e, sig.arg_sorts(*symbol)[*hole], sig.result_sort(*symbol))?;
                if subst.len() != c.aux_sorts.len() {
                    return Err(Error::BaseMismatch(format!("{e:?} needs {} parameters", c.aux_sorts.len())));
                }
                let mut params = Vec::with_capacity(subst.len());
                for (s, &want) in subst.iter().zip(&c.aux_sorts) {
                    let term = s.try_subst(&mut |&i| Ok(Term::Leaf(tree[leaf_at(args, i)? as usize])))?;
                    params.push(out.materialize(term, want)?);
                }
                ctx[x] = Some((e, params));
            }
            TslpRule::Compose(list) => {
                let items: Vec<(B::Elem, Vec<u32>)> =
                    list.iter().map(|&c| ctx[c as usize].clone().expect("children first")).collect();
                ctx[x] = Some(fold(base, &mut out, &items, &checked)?);
            }
            TslpRule::Apply { context, arg } => {
                let (e, params) = ctx[*context as usize].as_ref().expect("children first");
                let c = base.context(e);
                let a = tree[*arg as usize];
                let term = c.term.try_subst(&mut |l| {
                    Ok(Term::Leaf(match *l {
                        CtxLeaf::Hole => a,
                        CtxLeaf::Aux(j) => leaf_at(params, j)?,
                    }))
                })?;
                tree[x] = out.materialize(term, c.result_sort)?;
            }
        }
    }
    let start = tree[t.start as usize];
    let g = GammaSlp { signature: t.signature.clone(), sorts: out.sorts, rules: out.rules, start };
    Ok(g.gc()?.0)
}

/// Balances a grammar for every algebra that admits `base`.
pub fn balance_circuit<B: SubsumptionBase>(g: &GammaSlp, base: &B) -> Result<GammaSlp> {
    tslp_to_slp(&balance_to_tslp(g)?, base)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    /// Atomic contexts and element pairs checked.
    pub checks: usize,
    /// Pointwise evaluations performed.
    pub samples: usize,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Pairs of elements checked at most; larger bases are sampled.
const MAX_PAIRS: usize = 4096;

/// Checks pointwise, on random carrier elements, that the base subsumes every
/// atomic context and every composition of two of its elements.
pub fn verify_subsumption_base<B: SubsumptionBase, A: Sampler>(
    base: &B,
    alg: &A,
    samples_per_check: usize,
    seed: u64,
) -> VerifyReport {
    let sig = base.signature();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = VerifyReport::default();
    const MAX_FAILURES: usize = 50;

    for f in 0..sig.symbol_count() as SymbolId {
        let want = sig.arg_sorts(f).to_vec();
        for hole in 0..want.len() {
            rep.checks += 1;
            let (e, subst) = match base.subsume_atomic(f, hole) {
                Ok(r) => r,
                Err(err) => {
                    rep.failures.push(format!("atomic {}@{hole}: {err}", sig.names[f as usize]));
                    continue;
                }
            };
            let c = base.context(&e);
            if let Err(err) = c.check(sig) {
                rep.failures.push(format!("atomic {}@{hole}: {err}", sig.names[f as usize]));
                continue;
            }
            if c.hole_sort != want[hole] || c.result_sort != sig.result_sort(f) || subst.len() != c.aux_sorts.len() {
                rep.failures.push(format!("atomic {}@{hole}: {e:?} has the wrong type", sig.names[f as usize]));
                continue;
            }
            for _ in 0..samples_per_check {
                rep.samples += 1;
                let args: Vec<A::Value> = want.iter().map(|&s| alg.sample(s, &mut rng)).collect();
                let others: Vec<A::Value> = args.iter().enumerate().filter(|&(j, _)| j != hole).map(|(_, v)| v.clone()).collect();
                let lhs = alg.apply(f, &args);
                let rhs = subst
                    .iter()
                    .map(|s| eval_term(s, alg, &mut |&i| leaf_at(&others, i)))
                    .collect::<Result<Vec<_>>>()
                    .and_then(|params| c.eval(alg, &args[hole], &params));
                if lhs.is_err() || lhs != rhs {
                    rep.failures
                        .push(format!("atomic {}@{hole} via {e:?}: {lhs:?} != {rhs:?} at {args:?}", sig.names[f as usize]));
                    break;
                }
            }
            if rep.failures.len() >= MAX_FAILURES {
                return rep;
            }
        }
    }

    let elems = base.elements();
    let ctxs: Vec<Context> = elems.iter().map(|e| base.context(e)).collect();
    for (e, c) in elems.iter().zip(&ctxs) {
        if let Err(err) = c.check(sig) {
            rep.failures.push(format!("element {e:?}: {err}"));
        }
    }
    let mut pairs = Vec::new();
    for (i, co) in ctxs.iter().enumerate() {
        for (j, ci) in ctxs.iter().enumerate() {
            if co.hole_sort == ci.result_sort {
                pairs.push((i, j));
            }
        }
    }
    if pairs.len() > MAX_PAIRS {
        let keep = sample(&mut rng, pairs.len(), MAX_PAIRS);
        let mut chosen: Vec<(usize, usize)> = keep.iter().map(|k| pairs[k]).collect();
        chosen.sort_unstable();
        pairs = chosen;
    }
    for (i, j) in pairs {
        rep.checks += 1;
        let (eo, ei) = (&elems[i], &elems[j]);
        let (co, ci) = (&ctxs[i], &ctxs[j]);
        let (e, subst) = match base.compose(eo, ei) {
            Ok(r) => r,
            Err(err) => {
                rep.failures.push(format!("compose {eo:?} {ei:?}: {err}"));
                continue;
            }
        };
        let c = base.context(&e);
        if let Err(err) = c.check(sig) {
            rep.failures.push(format!("compose {eo:?} {ei:?} -> {e:?}: {err}"));
            continue;
        }
        if c.hole_sort != ci.hole_sort || c.result_sort != co.result_sort || subst.len() != c.aux_sorts.len() {
            rep.failures.push(format!("compose {eo:?} {ei:?} -> {e:?}: wrong type"));
            continue;
        }
        for _ in 0..samples_per_check {
            rep.samples += 1;
            let x = alg.sample(ci.hole_sort, &mut rng);
            let pi: Vec<A::Value> = ci.aux_sorts.iter().map(|&s| alg.sample(s, &mut rng)).collect();
            let po: Vec<A::Value> = co.aux_sorts.iter().map(|&s| alg.sample(s, &mut rng)).collect();
            let lhs = ci.eval(alg, &x, &pi).and_then(|v| co.eval(alg, &v, &po));
            let rhs = subst
                .iter()
                .map(|s| {
                    eval_term(s, alg, &mut |side| match *side {
                        Side::Outer(k) => leaf_at(&po, k),
                        Side::Inner(k) => leaf_at(&pi, k),
                    })
                })
                .collect::<Result<Vec<_>>>()
                .and_then(|params| c.eval(alg, &x, &params));
            if lhs.is_err() || lhs != rhs {
                rep.failures
                    .push(format!("compose {eo:?} {ei:?} -> {e:?}: {lhs:?} != {rhs:?} at x={x:?} outer={po:?} inner={pi:?}"));
                break;
            }
        }
        if rep.failures.len() >= MAX_FAILURES {
            return rep;
        }
    }
    rep
}
