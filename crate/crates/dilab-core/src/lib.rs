//! Numerical operator theory at desk scale.
//!
//! The crate is organized around one storyline in two acts. The first act is
//! single-operator: a contraction `T` on a finite-dimensional space comes with
//! defect operators, a block-unitary rotation matrix, a truncated isometric
//! dilation on a coefficient Hardy space, and a characteristic function whose
//! multiplication operator realizes the Beurling decomposition of the shift.
//! The second act replays the same structure one level up: unital completely
//! positive maps in Kraus form are compressions of unitary cocycles on a toy
//! Fock space, and ergodicity / absorption of the CP map decides whether the
//! cocycle converges to an isometry onto the Fock factor.
//!
//! Everything is dense, deterministic and tolerance-audited; there is no
//! randomness inside the library itself (samplers take a caller-provided RNG).

pub mod charfun;
pub mod cocycle;
pub mod contraction;
pub mod cp;
pub mod dilation;
pub mod numeric;

pub use numeric::matrix::{ComplexMatrix, C64};
pub use numeric::{NumericError, Tolerance};
