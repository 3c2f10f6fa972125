//! Classical Liouville and quantum von Neumann dynamics in a common
//! superoperator language.
//!
//! A classical phase-space density `ρ(x,p)` is Fourier transformed in `p` and
//! rotated to the coordinates `Q = x + y/2`, `q = x − y/2`. In those
//! coordinates the Liouville equation takes the von Neumann form
//!
//! ```text
//! iħ ∂ₜρ(Q,q) = { Ĥ_Q − Ĥ_q + ℰ(Q,q) } ρ(Q,q)
//! ```
//!
//! with an antisymmetric superoperator `ℰ` that vanishes exactly for
//! constant, linear or harmonic potentials. The crate builds both generators
//! side by side, evolves density matrices with them, evaluates the free and
//! first-order superpropagators, and applies the construction to the
//! Jaynes-Cummings model and to a bipartite anharmonic coupling.
//!
//! Module map:
//!
//! * [`potential`]: potentials, superpotentials, `ℰ`, bipartite term classification
//! * [`superspace`]: phase space ↔ superspace transforms, traces, moments
//! * [`liouvillian`]: grid and basis Liouville superoperators
//! * [`evolution`]: exact, time-ordered, interaction-picture, split-step and
//!   characteristics evolution
//! * [`superprop`]: free superpropagator, `Γ_QM`/`Γ_CL`, numerical Dyson terms
//! * [`jaynescummings`]: JC Hamiltonians, Coulomb superoperator elements, JC evolution
//! * [`entangle`]: bipartite CL/QM entanglement generation
//! * [`scenarios`] and [`checks`]: bundled scenario set and the invariant suite
//!
//! Data-parallel loops (Monte Carlo blocks, ensembles, FFT rows, batch
//! evaluation) run on rayon when the `parallel` feature is enabled (default)
//! and fall back to plain iterators otherwise. Results are identical in both
//! modes: reductions always combine per-block partial sums in block order.

// `!(x > 0.0)` range checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod entangle;
pub mod error;
pub mod evolution;
pub mod jaynescummings;
pub mod linalg;
pub mod liouvillian;
pub mod potential;
pub mod quad;
pub mod scenarios;
pub mod spectral;
pub mod superprop;
pub mod superspace;

pub(crate) mod parallel;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for density matrices and superoperators.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Whether this build runs its data-parallel loops on rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
