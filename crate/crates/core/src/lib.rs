//! Lamb-wave dispersion in uniaxially pre-stressed hyperelastic plates.
//!
//! The pipeline runs from constitutive models through a homogeneous
//! pre-stress solve, a Floquet unit-cell eigenvalue sweep and an
//! analytical Rayleigh-Lamb oracle, to synthetic wavefields, 2D-DFT
//! dispersion extraction and stress regression.

pub mod analysis;
pub mod constitutive;
pub mod error;
pub mod interp;
pub mod io;
pub mod lamb;
pub mod prestress;
pub mod tensor;
pub mod unitcell;
pub mod wavefield;

pub use error::{Error, Result};
