//! Deep Heaviside networks with explicit constructions.
//!
//! * [`net`]: the plain, skip and lin network families, exact evaluation,
//!   embeddings and the JSON document format.
//! * [`builders`]: constructions with concrete weights (indicators, parity,
//!   bit extractors, square and Hölder approximators, decoders, shattering
//!   networks), each tagged with its proven error guarantee.
//! * [`analysis`]: exact and sampled piece counting along segments, sup-norm
//!   errors, closed-form bounds, shattering certificates and Taylor references.
//! * [`cli`]: the `dhn` command-line front end.

pub mod error;
pub mod net;
pub mod builders;
pub mod analysis;
pub mod cli;

pub use error::{Error, Result};
