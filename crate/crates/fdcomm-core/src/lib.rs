//! Fermi–Dirac equilibria of the harmonic and Fock–Darwin oscillators.
//!
//! Exact spectral sums for Schatten norms of commutators `[a, F(H)]`, the
//! classical phase-space counterparts, and constant-free envelopes.
//! Everything here is `no_std` with `alloc`; dense linear algebra, the CLI and
//! serialization live in the `fdcomm` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod classical_norms;
mod error;
pub mod fermi_dirac;
pub mod harmonic_spectral;
mod lattice;
pub mod magnetic_spectral;
pub mod model_params;
pub mod quadrature;
pub mod special;

pub use error::Error;
pub use model_params::{
    classify_regime, holder_conjugate, sphere_measure, EnvelopeValue, NormValue, PhysicalParams,
    RegimeLabel, SchattenOrder,
};
