//! Morphological (max-sum), signed max-sum, max*-sum, LNS and sum-product
//! network nodes, a symbolic canonicalizer for the max families, and
//! numerical experiments on what each family can approximate.

pub mod activation;
pub mod approx;
pub mod canonicalize;
pub mod claims;
pub mod cli;
pub mod error;
pub mod network;
pub mod nodes;
pub mod signed_log;

pub use activation::ActivationKind;
pub use error::{DomainError, SpecError};
pub use network::{evaluate, finite_diff, random_network, DerivativeProbe, NetworkSpec};
pub use nodes::NodeKind;
pub use signed_log::SignedLogValue;
