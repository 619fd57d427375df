//! Many-sorted signatures, straight-line programs over them, and the generic
//! balancing pipeline through term/context programs and subsumption bases.

mod base;
mod gslp;
mod signature;
mod term;
mod text;
mod tslp;

pub use base::{
    balance_circuit, tslp_to_slp, verify_subsumption_base, Context, CtxLeaf, Side, SubsumptionBase, VerifyReport,
    MAX_CONTEXT_NODES,
};
pub use gslp::GammaSlp;
pub use signature::{Signature, SortId, SymbolId};
pub use term::Term;
pub use text::{parse_gslp, write_gslp};
pub use tslp::{balance_to_tslp, Tslp, TslpRule, TslpSort, HOLE};

pub(crate) use text::{parse_body, write_body};

use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;
use std::fmt::Debug;
use std::sync::Arc;

/// Interpretation of a signature.
pub trait Algebra {
    type Value: Clone + PartialEq + Debug;
    fn apply(&self, f: SymbolId, args: &[Self::Value]) -> Result<Self::Value>;
}

/// An algebra that can draw random carrier elements of each sort.
pub trait Sampler: Algebra {
    fn sample(&self, sort: SortId, rng: &mut ChaCha8Rng) -> Self::Value;
}

/// Terms as preorder symbol sequences.
#[derive(Clone, Debug)]
pub struct FreeAlgebra {
    signature: Arc<Signature>,
}

impl FreeAlgebra {
    pub fn new(signature: Arc<Signature>) -> Self {
        FreeAlgebra { signature }
    }
}

impl Algebra for FreeAlgebra {
    type Value = Arc<[u32]>;

    fn apply(&self, f: SymbolId, args: &[Self::Value]) -> Result<Self::Value> {
        self.signature.check_symbol(f)?;
        if self.signature.rank(f) != args.len() {
            return Err(Error::SortMismatch(format!("symbol {f} applied to {} arguments", args.len())));
        }
        let mut v = Vec::with_capacity(1 + args.iter().map(|a| a.len()).sum::<usize>());
        v.push(f);
        for a in args {
            v.extend_from_slice(a);
        }
        Ok(v.into())
    }
}
