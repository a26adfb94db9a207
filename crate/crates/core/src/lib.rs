//! Holonomic quantum computation, numerically.
//!
//! Iso-spectral Hamiltonian families `H(λ) = U(λ) H0 U(λ)†` carry a gauge
//! connection `A_μ = ⟨ψ^α|∂_μ ψ^β⟩` on each degenerate eigen-space. This
//! crate builds those connections (analytically and from frames), their
//! curvature, loops in the control charts, and the path-ordered holonomies
//! `P exp ∮ A` obtained by transporting around them. It also simulates the
//! optical kick method in truncated Fock space and plans loop programs that
//! realize requested one-qubit gates.
//!
//! Holonomies use one ordering convention throughout: factors for later loop
//! parameters multiply on the left, so `Γ(γ1 then γ2) = Γ(γ2)·Γ(γ1)`.

pub mod chart;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod fock;
pub mod frames;
pub mod holonomy;
pub mod loops;
pub mod matrix;
pub mod synthesis;

pub use chart::{Chart, ControlPoint};
pub use connection::{
    cpn_connection, interferometer_connection, optical_connection, ConnectionField, CpnConnection,
    InterferometerConnection, NumericConnection, OpticalConnection,
};
pub use error::{Error, Result};
pub use frames::{numeric_connection, FrameField};
pub use holonomy::{holonomy_ordered, HolonomyResult};
pub use loops::{Loop, LoopSpec};
pub use matrix::{commutator, expm, structure_defects, ComplexMatrix, C64};
