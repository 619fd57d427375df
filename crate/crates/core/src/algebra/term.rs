use super::signature::{Signature, SortId, SymbolId};
use crate::error::{Error, Result};

/// A finite term; leaves carry variables of some kind `L`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term<L> {
    Leaf(L),
    App(SymbolId, Vec<Term<L>>),
}

impl<L> Term<L> {
    pub fn constant(f: SymbolId) -> Self {
        Term::App(f, Vec::new())
    }

    pub fn app(f: SymbolId, args: Vec<Term<L>>) -> Self {
        Term::App(f, args)
    }

    pub fn node_count(&self) -> usize {
        match self {
            Term::Leaf(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::node_count).sum::<usize>(),
        }
    }

    /// Symbol nodes only.
    pub fn symbol_count(&self) -> usize {
        match self {
            Term::Leaf(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::symbol_count).sum::<usize>(),
        }
    }

    pub fn edge_count(&self) -> usize {
        match self {
            Term::Leaf(_) => 0,
            Term::App(_, args) => args.len() + args.iter().map(Term::edge_count).sum::<usize>(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Term::Leaf(_))
    }

    pub fn for_each_leaf<'a>(&'a self, f: &mut impl FnMut(&'a L)) {
        match self {
            Term::Leaf(l) => f(l),
            Term::App(_, args) => args.iter().for_each(|a| a.for_each_leaf(f)),
        }
    }

    /// Replaces every leaf by a term.
    pub fn subst<M>(&self, f: &mut impl FnMut(&L) -> Term<M>) -> Term<M> {
        match self {
            Term::Leaf(l) => f(l),
            Term::App(g, args) => Term::App(*g, args.iter().map(|a| a.subst(f)).collect()),
        }
    }

    pub fn try_subst<M>(&self, f: &mut impl FnMut(&L) -> Result<Term<M>>) -> Result<Term<M>> {
        Ok(match self {
            Term::Leaf(l) => f(l)?,
            Term::App(g, args) => Term::App(*g, args.iter().map(|a| a.try_subst(f)).collect::<Result<_>>()?),
        })
    }

    /// Sort of the term, checking every application against `sig`.
    pub fn sort(&self, sig: &Signature, leaf_sort: &mut impl FnMut(&L) -> Result<SortId>) -> Result<SortId> {
        match self {
            Term::Leaf(l) => leaf_sort(l),
            Term::App(f, args) => {
                sig.check_symbol(*f)?;
                let want = sig.arg_sorts(*f);
                if want.len() != args.len() {
                    return Err(Error::SortMismatch(format!(
                        "symbol {} takes {} arguments, got {}",
                        sig.names[*f as usize],
                        want.len(),
                        args.len()
                    )));
                }
                for (i, (a, &w)) in args.iter().zip(want).enumerate() {
                    let s = a.sort(sig, leaf_sort)?;
                    if s != w {
                        return Err(Error::SortMismatch(format!(
                            "argument {i} of {} has sort {s}, expected {w}",
                            sig.names[*f as usize]
                        )));
                    }
                }
                Ok(sig.result_sort(*f))
            }
        }
    }
}
