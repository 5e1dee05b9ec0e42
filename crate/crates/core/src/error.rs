use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field degree {0} outside the supported range 1..={max}", max = crate::gf2n::MAX_DEGREE)]
    DegreeOutOfRange(usize),
    #[error("polynomial {bits:#b} is not an irreducible monic polynomial of degree {degree}")]
    NotIrreducible { degree: usize, bits: u32 },
    #[error("matrix is not Hankel")]
    NotHankel,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{n} qubits exceeds the supported maximum of {max}")]
    TooManyQubits { n: usize, max: usize },
    #[error("qubit index {qubit} out of range for {n} qubits")]
    InvalidQubit { qubit: usize, n: usize },
    #[error("two-qubit gate acts twice on qubit {0}")]
    RepeatedQubit(usize),
    #[error("gate {0} is not supported for Z-tableau tracking")]
    UnsupportedGate(String),
    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("the identity Pauli has no ensemble element")]
    IdentityPauli,
    #[error("ensemble element index {index} out of range (ensemble has {len} elements)")]
    ElementOutOfRange { index: usize, len: usize },
    #[error("module index {k} out of range for {n} qubits")]
    ModuleOutOfRange { k: usize, n: usize },
    #[error("observable is proportional to the identity; no biased distribution exists")]
    TrivialObservable,
    #[error("element {0} has zero sampling probability")]
    ZeroProbabilityElement(usize),
    #[error("Pauli-sum observable has no terms")]
    EmptyTerms,
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("overlap profile mismatch: {0}")]
    ProfileMismatch(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
