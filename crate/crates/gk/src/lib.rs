//! Symbolic engine for definable sets over a binary pairing function without
//! cycles.
//!
//! The structure is a set `M` with a bijection `(l, r): M -> M^2` such that
//! no composition of `l` and `r` has a fixed point. This crate decides, for
//! quantifier-free formulas over `{l, r}` with named parameters:
//!
//! - satisfiability and cardinality class (empty, a finite count, infinite),
//! - the class of the defined set in the Grothendieck ring `Z[X]/(X - X^2)`,
//!   where `X` is the class of `M` itself,
//! - structural facts used on the way: closed subtrees of primitive formulas,
//!   simple sets and their Noetherian lattice at fixed depth, decompositions
//!   into elementary pieces and their trees, and images of simple sets under
//!   definable injections given in normal form.
//!
//! Every decision route is paired with a bounded brute-force oracle that
//! enumerates equality patterns of depth-`p` leaves, so the algebraic engine
//! can be differentially tested against exhaustive enumeration.

pub mod congruence;
pub mod diagram;
pub mod error;
pub mod syntax;

pub use diagram::ParamDiagram;
pub use error::{Error, Result};
pub mod cli;
pub mod grothendieck;
pub mod oracle;
pub mod simple;
