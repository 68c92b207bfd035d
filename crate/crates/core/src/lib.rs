//! Spectral verification of Douglis-Nirenberg elliptic systems in
//! Hörmander spaces `H^φ` on the n-torus.
//!
//! The crate models RO-varying weight parameters ([`roparam`]), weighted
//! Fourier-coefficient norms ([`hspace`]), matrix differential systems with
//! mixed orders ([`dnsystem`]), Fourier-multiplier operators and parametrices
//! ([`pdo`]), interpolation with a function parameter ([`interp`]), and
//! theorem-level experiments built on top of them ([`harness`]).
//!
//! `ℝⁿ` is replaced throughout by the 2π-periodic torus with integer lattice
//! frequencies. Every [`report::Report`] records that surrogate.

pub mod cli;
pub mod dnsystem;
pub mod error;
pub mod harness;
pub mod hspace;
pub mod interp;
pub mod linalg;
pub mod numeric;
pub mod pdo;
pub mod report;
pub mod roparam;

pub use error::{Error, Result};
pub use num_complex::Complex64;
