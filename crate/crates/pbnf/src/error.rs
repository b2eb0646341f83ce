//! Error type shared across the crate.

/// Errors produced by algebraic operations, solvers and file I/O.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("variable-pair count mismatch: {0} vs {1}")]
    MismatchedVars(usize, usize),

    #[error("family size mismatch: {0} vs {1}")]
    MismatchedFamily(usize, usize),

    #[error("truncation degree exhausted: need {needed}, have {have}")]
    DegreeExhausted { needed: u32, have: u32 },

    #[error("generator has minimum degree {0} < 2; the Lie series need not terminate")]
    NonterminatingSeries(u32),

    #[error("resonant term at (Q={q}, j={j}) where a nonresonant right-hand side is required")]
    ResonantTerm { q: String, j: i32 },

    #[error("cocycle compatibility fails at (Q={q}, l={l}) between members {i} and {j}")]
    NotACocycle { q: String, l: i32, i: usize, j: usize },

    #[error("normal form is not completely integrable: {0}")]
    NotCompletelyIntegrable(String),

    #[error("members {i} and {j} do not commute: first nonzero bracket term at {detail}")]
    NotCommuting { i: usize, j: usize, detail: String },

    #[error("linear part of member {0} is not the fundamental field")]
    WrongLinearPart(usize),

    #[error("invalid scheme constants: {0}")]
    InvalidConstants(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
