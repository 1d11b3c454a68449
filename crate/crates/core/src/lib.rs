//! Arithmetic random waves on the flat torus `R^2 / Z^2`.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: sums of two squares, the frequency sets `Λ_n`, prime angles and
//!   energy-level sequences;
//! - [`spectral`]: the spectral measure `μ_n`, its Fourier coefficients, the variance
//!   constant `c_n` and the limiting measures `ν_a`;
//! - [`correlation`]: spectral correlation counts `|S_4|`, `|S_6|`, additive energy and the
//!   covariance moments `R_k`;
//! - [`kac_rice`]: the covariance jet `(r, D, H)`, the scaled two-point correlation `K_2`,
//!   the singular set and the lattice-sum integral identities;
//! - [`sampler`]: exact field synthesis on torus grids, nodal-length extraction and the
//!   Monte Carlo experiment engine.

pub mod correlation;
pub mod error;
pub mod kac_rice;
pub mod lattice;
pub mod quadrature;
pub mod sampler;
pub mod spectral;
pub mod stats;
pub mod trig_grid;

pub use error::{ArwError, Result};
pub use lattice::{EnergySequence, FrequencySet, SequenceKind};
