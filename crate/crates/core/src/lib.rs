//! Exact verification of q-series identities and the finite-field
//! subspace counts they describe.

pub mod bridge;
pub mod combinatorics;
pub mod eisenstein;
pub mod gfq;
pub mod identities;
pub mod qlaurent;
pub mod verification;

pub use eisenstein::EisensteinInt;
pub use gfq::{DimensionSequence, FieldCtx, FieldElem, GfError, Matrix, Subspace};
pub use identities::{verify_range, Identity, IdentityError};
pub use qlaurent::{EvalValue, ExponentVector, LaurentPoly, PolyError, Var};
pub use verification::{Comparison, Side, Status, VerificationResult, Witness};
