//! File formats, bundled derivations, and the batch front end for the
//! causal-logic kernel. The algorithmic core lives in `stacl-core`; this
//! crate owns everything that touches the filesystem or a terminal.

pub mod driver;
pub mod model;
pub mod prooffile;
pub mod proofs;
pub mod simpson;
