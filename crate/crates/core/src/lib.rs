//! Numerical and closed-form checks for p-ellipticity of second-order
//! elliptic systems `∂_h(A^{hk}_{αβ} ∂_k u^β)`.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! `std` feature; `std` only switches multistart loops to rayon.
//!
//! Module map:
//!
//! * [`tensor`]: coefficient tensors, gradient states, the `ξ(ω)` projection
//!   and sampled coefficient fields.
//! * [`pointwise`]: strong, Legendre-Hadamard and scalar p-ellipticity
//!   margins.
//! * [`range`]: the `t = 1 - 2/p` parametrization and admissible p-intervals.
//! * [`integral`]: discretized integral p-ellipticity quotient, the random
//!   falsifier, the `λ_p` estimate and the gradient-power identity.
//! * [`lame`]: Lamé tensors and closed-form p-ellipticity constants.
//! * [`solvability`]: Dirichlet-problem solvability range arithmetic.
//! * [`oracle`]: brute-force margins and random tensor generators used to
//!   cross-check the optimizing code.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod eigen;
pub mod error;
pub mod integral;
pub mod lame;
pub mod oracle;
pub mod pointwise;
pub mod range;
pub mod solvability;
pub mod tensor;

mod math;
mod par;
mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use pointwise::{MarginResult, Scalars, SearchConfig, Witness};
pub use range::{ConditionKind, PRange};
pub use tensor::{CoefficientTensor, GradientState, TensorField, UnitState};
