//! Constructive, finite-size checks of how anyonic superselection sectors
//! behave under stacking.
//!
//! * [`group`] and [`character`]: finite groups as tables and their complex
//!   character tables.
//! * [`double`]: the anyon catalog of the Drinfeld double `D(G)`, its fusion
//!   rules, and their factorization for direct products.
//! * [`lattice`], [`operator`], [`qd`], [`ribbon`]: quantum double models on
//!   small directed square lattices, built from local sparse operators.
//! * [`entropy`] and [`stabilizer`]: reduced density matrices, entropies and
//!   the entropic identities of fixed-point topological states.
//! * [`set_model`]: the symmetry-enriched toric code.

pub mod character;
pub mod double;
pub mod entropy;
pub mod error;
pub mod group;
pub mod lattice;
pub mod operator;
pub mod qd;
pub mod report;
pub mod ribbon;
pub mod set_model;
pub mod stabilizer;

pub use error::{Error, Result};
