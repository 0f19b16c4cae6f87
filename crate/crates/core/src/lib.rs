//! Numerical laboratory for Markovian open quantum dynamics on a finite
//! one-dimensional lattice.
//!
//! The crate evolves density matrices under the von Neumann–Lindblad
//! equation, computes the velocity operator `γ = L'⟨x⟩` and its norm `κ`,
//! and measures how well evolving states stay inside the light cone
//! `⟨x⟩ ≤ a + c t` for `c > κ`.
//!
//! Layout:
//!
//! * [`linalg`]: dense complex matrices, Hermitian eigensolver, matrix
//!   exponential, superoperator vectorization.
//! * [`model`]: lattice geometry, Hamiltonians, Kraus families and the
//!   iterated-commutator audit.
//! * [`dynamics`]: the generator `L`, its dual `L'`, time evolution and the
//!   stationary-state solver.
//! * [`cutoffs`]: smooth cutoff functions with exact derivatives and their
//!   diagonal operator realizations.
//! * [`lightcone`]: velocity bound, leakage, scaling experiments and the
//!   inequality verifiers.

pub mod cutoffs;
pub mod dynamics;
pub mod error;
pub mod lightcone;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod tolerances;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
