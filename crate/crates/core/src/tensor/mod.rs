//! Dense small-dimension tensor arithmetic: jets, signatures, ε symbols.

pub mod dense;
pub mod epsilon;
pub mod jet;
pub mod linalg;
pub mod signature;

pub use dense::{epsilon_contract, Basis, IndexSlot, Tensor, TensorError, Variance};
pub use epsilon::{factorial, for_each_saturated, EpsilonSymbol};
pub use jet::{jet_seed, Dual, Jet2, Scalar, MAX_DIM};
pub use signature::{eta, eta_inverse, Signature};
