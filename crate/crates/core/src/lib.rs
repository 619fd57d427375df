//! Straight-line programs over strings and multi-sorted algebras, their
//! rebalancing to logarithmic depth, and queries over balanced grammars.

pub mod algebra;
pub mod balance;
pub mod error;
pub mod gen;
pub mod instances;
pub mod query;
pub mod scd;
pub mod sslp;
pub mod wsuffix;

pub use algebra::{Algebra, GammaSlp, Sampler, Signature, SubsumptionBase, Term, Tslp};
pub use balance::{balance, verify_equivalence, BalanceReport, Equivalence, Method};
pub use error::{Error, Result};
pub use query::{grammar_fingerprint, AccessIndex, FingerprintIndex, OccIndex, RmqIndex};
pub use scd::{decompose, CentroidPath, MultiDag, ScdResult};
pub use sslp::{Sslp, SslpStats, Symbol};
pub use wsuffix::{build_prefix_sslp, build_suffix_sslp, SuffixSslp, WeightedString};
