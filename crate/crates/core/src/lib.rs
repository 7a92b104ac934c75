//! Input-output fidelities of bosonic Gaussian channels.
//!
//! States are described by a covariance matrix and a displacement vector in
//! the interleaved quadrature ordering `(x1, p1, ..., xn, pn)`, with the
//! vacuum covariance equal to `I/2`. A channel is a pair `(A, G)` acting as
//! `Γ -> AΓAᵀ + G`, `D -> A D`. For a pure input the fidelity
//! `Tr(ρ_in ρ_out)` has the closed form
//!
//! ```text
//! F = det(AΓAᵀ + Γ + G)^{-1/2} · exp(-½ ΔDᵀ (AΓAᵀ + Γ + G)⁻¹ ΔD),   ΔD = A D - D
//! ```
//!
//! which [`fidelity::channel_fidelity`] evaluates. The [`oracle`] module
//! provides two independent numerical checks of the same quantity, and
//! [`sweep`] drives parameter grids for the `gaussfid` command-line tool.

#![forbid(unsafe_code)]

pub mod channels;
pub mod cli;
pub mod config;
pub mod error;
pub mod fidelity;
pub mod oracle;
pub mod phase_space;
pub mod states;
pub mod sweep;

pub use channels::{GaussianChannel, MemoryNoiseSpec, ValidityReport};
pub use error::{Error, Result};
pub use fidelity::{channel_fidelity, overlap, FidelityResult};
pub use phase_space::{PhaseSpaceVector, QuadratureOrdering, SymplecticForm};
pub use states::GaussianState;

/// Dynamic real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dynamic real vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
