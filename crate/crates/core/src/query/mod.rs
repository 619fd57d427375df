//! Query structures over grammar-compressed strings.
//!
//! Every index normalizes its grammar to binary form and descends from the
//! start variable guided by stored lengths, so query time is proportional to
//! the derivation depth. The `*_counted` variants also report how many
//! variables the descent touched.

mod access;
mod fingerprint;
mod occ;
mod rmq;

pub use access::AccessIndex;
pub(crate) use fingerprint::hash_slice;
pub use fingerprint::{grammar_fingerprint, FingerprintIndex, MERSENNE_61};
pub use occ::OccIndex;
pub use rmq::RmqIndex;
