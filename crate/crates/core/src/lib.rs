//! Heisenberg-picture matrix elements and two-time correlation functions of
//! open quantum systems, computed from quantum state diffusion in a doubled
//! Hilbert space.
//!
//! The building blocks:
//!
//! * [`hilbert`]: kets, operators, Lindblad models and the doubled space;
//! * [`master`]: a dense Lindblad master-equation solver used as the
//!   deterministic reference;
//! * [`qsd`] and [`jump`]: diffusive and jump unravelings, both available
//!   through the [`unraveling`] registry;
//! * [`correlations`]: matrix elements `⟨φ|A(t)|ψ⟩` and `⟨A(t+τ)B(t)⟩`;
//! * [`gisin`]: the coupled two-state scheme, kept for comparison;
//! * [`ensemble`]: deterministic parallel ensembles and benchmark sweeps.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the component formulas in the kernels.
#![allow(clippy::needless_range_loop)]

pub mod correlations;
pub mod ensemble;
pub mod error;
pub mod gisin;
pub mod hilbert;
pub mod jump;
pub(crate) mod kernel;
pub mod master;
pub mod qsd;
pub mod rng;
pub mod unraveling;

pub use correlations::{correlate, heisenberg_element, CorrelationRequest, InitialCondition};
pub use ensemble::{EnsembleOptions, EnsembleResult, Estimate};
pub use error::{Error, Result};
pub use hilbert::{extend_model, make_theta, projector, DoubledState, Ket, LindbladModel, Operator, C64};
pub use master::{DensityMatrix, OdeConfig};
pub use qsd::{QsdUnraveling, SdeConfig, SdeScheme};
pub use jump::JumpUnraveling;
pub use unraveling::{Unraveling, UnravelingParams, UnravelingRegistry};
