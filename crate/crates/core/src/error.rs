use thiserror::Error;

/// Errors raised by the library. Row and share numbers carried in variants
/// are 1-based, the way they appear in code files and reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported modulus {0}: expected one of 2, 3, 5, 7")]
    UnsupportedModulus(u32),

    #[error("value {value} out of range for modulus {modulus}")]
    OutOfRange { value: i64, modulus: u8 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u8, u8),

    #[error("share index {index} out of range 1..={n}")]
    ShareIndexOutOfRange { index: usize, n: usize },

    #[error("rows dependent: row {row} is a combination of the rows above it")]
    RowsDependent { row: usize },

    #[error("not commutative: rows {first} and {second} have symplectic product {product}")]
    NotCommutative {
        first: usize,
        second: usize,
        product: u8,
    },

    #[error("enumeration limit: {required} codewords exceed the budget of {budget}")]
    EnumerationLimit { required: u128, budget: u128 },

    #[error("dense budget exceeded: dimension {required} exceeds {budget}")]
    DenseBudget { required: u128, budget: u128 },

    #[error("code has no logical qudits (k = 0)")]
    NoLogicalQudits,

    #[error("not advance shareable: {0}")]
    NotAdvanceShareable(String),

    #[error("gram mismatch at generators {0} and {1}")]
    GramMismatch(usize, usize),

    #[error("dependent generators")]
    DependentGenerators,

    #[error("uncorrectable erasure of shares {0:?}")]
    UncorrectableErasure(Vec<usize>),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
