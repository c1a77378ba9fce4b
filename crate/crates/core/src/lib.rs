//! Capacity bounds and protocol simulation for finite-dimensional quantum
//! channel collections.
//!
//! A channel collection is a labelled family of CPTP maps sharing input and
//! output systems; a rebound protocol reads a message encoded into a sequence
//! of channels drawn from the collection, with the decoder holding both the
//! input and output ports of every call. This crate provides
//!
//! - dense complex linear algebra and density-operator primitives ([`qcore`]),
//! - Kraus-form channels, collections, and environment-parametrized /
//!   environment-seizable structure ([`channels`]),
//! - group representations, covariance and one-design checks, and jointly
//!   covariant collection construction ([`covariance`]),
//! - the ε-hypothesis-testing divergence via the quantum Neyman–Pearson
//!   test ([`divergences`]),
//! - Holevo-quantity and finite-blocklength capacity bounds ([`capacity`]),
//! - adaptive and non-adaptive protocol simulation together with the
//!   environment-parametrized reduction to a measurement on environment
//!   states ([`protocol`]).
//!
//! All information quantities are in bits (logarithms base 2). All systems
//! are finite-dimensional; matrices are dense. Values are immutable after
//! construction and operations are pure functions, so everything here is
//! safe to share across threads.

pub mod capacity;
pub mod channels;
pub mod covariance;
pub mod divergences;
pub mod protocol;
pub mod qcore;
pub mod random;

pub use qcore::{CMat, Complex64, DensityOperator, Register};

use thiserror::Error;

/// Errors shared across the crate.
///
/// Construction errors (`NotHermitian`, `InvalidState`, `NotCptp`, ...)
/// come from type constructors; the rest are raised by the operations
/// whose contracts they name.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row},{col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("matrix is not Hermitian (deviation {deviation:.3e} > {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("invalid density operator: {reason}")]
    InvalidState { reason: String },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("register name clash: {name}")]
    RegisterClash { name: String },
    #[error("unknown register: {name}")]
    UnknownRegister { name: String },
    #[error("register lists do not partition the state: {context}")]
    BadPartition { context: String },
    #[error("invalid probability distribution: {reason}")]
    BadDistribution { reason: String },
    #[error("Kraus list is not trace preserving (deviation {deviation:.3e} > {tol:.3e})")]
    NotCptp { deviation: f64, tol: f64 },
    #[error("collection needs at least two labels, got {got}")]
    AlphabetTooSmall { got: usize },
    #[error("duplicate label in collection: {label}")]
    DuplicateLabel { label: String },
    #[error("matrix is not unitary (deviation {deviation:.3e} > {tol:.3e})")]
    NotUnitary { deviation: f64, tol: f64 },
    #[error("group representation has no identity element within tolerance")]
    MissingIdentity,
    #[error("epsilon must lie in [0, 1), got {got}")]
    BadEpsilon { got: f64 },
    #[error("states are not block diagonal over the classical labels (off-block weight {deviation:.3e})")]
    NotBlockDiagonal { deviation: f64 },
    #[error("channel is not covariant with respect to the representation (deviation {deviation:.3e})")]
    NotCovariant { deviation: f64 },
    #[error("representation is not a unitary one-design (deviation {deviation:.3e})")]
    NotOneDesign { deviation: f64 },
    #[error("iteration cap {cap} reached; best value {best:.12} with certificate gap {gap:.3e}")]
    NonConvergence { cap: usize, best: f64, gap: f64 },
    #[error("problem size exceeds the dense-solver budget: {context}")]
    BudgetExceeded { context: String },
    #[error("collection failed environment-parametrization verification (max deviation {deviation:.3e})")]
    NotParametrized { deviation: f64 },
    #[error("collection failed seizure verification (max deviation {deviation:.3e})")]
    NotSeizable { deviation: f64 },
    #[error("codebook does not match the protocol or collection: {context}")]
    CodebookMismatch { context: String },
    #[error("invalid POVM: {reason}")]
    InvalidPovm { reason: String },
    #[error("unsupported mode: {context}")]
    UnsupportedMode { context: String },
}

pub type Result<T> = std::result::Result<T, Error>;
