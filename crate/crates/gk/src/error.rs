//! Error type shared by the whole crate.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Malformed formula source. `offset` is a byte offset into the input.
    Syntax { offset: usize, message: String },
    /// The input contains a quantifier; only quantifier-free formulas are accepted.
    QuantifierNotSupported { offset: usize },
    /// A term is deeper than the requested unfold depth.
    DepthTooSmall { required: usize, requested: usize },
    /// An equality between variable terms of unequal depth cannot be brought
    /// to a uniform leaf depth; the leaf-pattern pipeline does not cover it.
    UnbalancedAtom { lhs: String, rhs: String },
    /// A size or depth limit documented for the bounded engines was exceeded.
    DepthBudgetExceeded { what: String, limit: usize, requested: usize },
    NotPrimitive(String),
    NotPositivePrimitive(String),
    DepthMismatch { left: usize, right: usize },
    InvalidFrontier(String),
    NotExtended(String),
    WrongShape(String),
    NotAFunction(String),
    NotInjective(String),
    DomainMismatch(String),
    /// A normal formula mixes variable links of different depth offsets, so no
    /// single image depth exists for it.
    MixedDepthMap(String),
    NotElementary(String),
    AmbientNotClosed,
    /// The ground equations force `c = w(c)` for a non-empty word `w`.
    InconsistentDiagram(String),
    Overflow(String),
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Syntax { offset, message } => {
                write!(f, "syntax error at byte {offset}: {message}")
            }
            Error::QuantifierNotSupported { offset } => {
                write!(f, "quantifiers are not supported (at byte {offset})")
            }
            Error::DepthTooSmall { required, requested } => {
                write!(f, "depth {requested} is too small, formula needs {required}")
            }
            Error::UnbalancedAtom { lhs, rhs } => write!(
                f,
                "atom {lhs} = {rhs} relates variable terms of unequal depth; \
                 no uniform-depth unfolding exists"
            ),
            Error::DepthBudgetExceeded { what, limit, requested } => {
                write!(f, "{what} budget exceeded: {requested} > {limit}")
            }
            Error::NotPrimitive(m) => write!(f, "not a primitive formula: {m}"),
            Error::NotPositivePrimitive(m) => write!(f, "not a positive primitive formula: {m}"),
            Error::DepthMismatch { left, right } => {
                write!(f, "depth mismatch: {left} vs {right}")
            }
            Error::InvalidFrontier(m) => write!(f, "invalid frontier: {m}"),
            Error::NotExtended(m) => write!(f, "formula is not extended: {m}"),
            Error::WrongShape(m) => write!(f, "wrong shape: {m}"),
            Error::NotAFunction(m) => write!(f, "does not define a function: {m}"),
            Error::NotInjective(m) => write!(f, "not injective: {m}"),
            Error::DomainMismatch(m) => write!(f, "domain mismatch: {m}"),
            Error::MixedDepthMap(m) => write!(f, "mixed depth offsets in map: {m}"),
            Error::NotElementary(m) => write!(f, "decomposition is not elementary: {m}"),
            Error::AmbientNotClosed => write!(f, "ambient set is not closed at this depth"),
            Error::InconsistentDiagram(m) => write!(f, "inconsistent parameter diagram: {m}"),
            Error::Overflow(m) => write!(f, "integer overflow in {m}"),
            Error::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
