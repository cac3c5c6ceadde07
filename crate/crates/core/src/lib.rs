//! Advance sharing of quantum shares for stabilizer-based secret sharing.
//!
//! Given a stabilizer code over `F_p`, this crate decides which sets of
//! shares can be handed out before the secret exists, builds the
//! entanglement-assisted code and Clifford encoder that make it work, and
//! runs the whole protocol on a dense state-vector simulator.
//!
//! Finite-field code is exact and works on `u8` residues. Everything that
//! touches complex amplitudes is generic over [`scalar::Real`]; the aliases
//! below fix it to `f64`.

pub mod advance;
pub mod clifford;
pub mod codefile;
pub mod dense;
pub mod error;
pub mod gfp;
pub mod pauli;
pub mod scalar;
pub mod shares;
pub mod sim;
pub mod symplectic;

pub use advance::{
    construct_eaqecc, enumerate_advance_shareable, is_advance_shareable,
    is_advance_shareable_sufficient, normal_form, EaqeccParameters, EaqeccPlan, NormalForm,
    ShareableSet,
};
pub use clifford::{synthesize, CliffordCircuit, Gate, PhasedPauli, SymplecticMap, Synthesis};
pub use codefile::{format_code, parse_code, CodeFile};
pub use error::{Error, Result};
pub use gfp::{FpMatrix, FpScalar, FpVector, Modulus};
pub use pauli::{commutation_exponent, CodeParameters, PauliOperator, StabilizerCode};
pub use scalar::Real;
pub use shares::ShareSet;
pub use sim::{classify_access, erasure_correctable, AccessLabel, AdvanceScheme};
pub use symplectic::{EnumerationBudget, SymplecticCode, SymplecticVector};

pub type QuditState = sim::QuditState<f64>;
pub type DensityOperator = sim::DensityOperator<f64>;
pub type DenseMatrix = dense::DenseMatrix<f64>;
pub type EncodedState = sim::EncodedState<f64>;
