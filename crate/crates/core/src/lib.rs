//! Synthetic (Berry) magnetic fields of two interacting spin-½ particles in
//! an external field `b`, with monopole location and charge extraction.
//!
//! The Hamiltonian is `H = b·S + 4J s1ᶻ s2ᶻ + 4D·(s1 × s2)`. Each energy
//! eigenstate carries a curvature field over `b`-space whose sources are
//! point monopoles at level crossings with half-integer charges.
//!
//! ```
//! use monopole_atlas::{berry::FieldModel, spinops::{Coupling, FieldPoint}};
//!
//! // the top Zeeman band (M = +1) sees a Coulomb field of charge -1
//! let model = FieldModel::new(Coupling::ZERO);
//! let b = model.field(&FieldPoint::new(0.0, 0.0, 2.0), 2).unwrap();
//! assert!((b[2] + 0.25).abs() < 1e-12);
//! ```

pub mod berry;
pub mod charges;
pub mod cli;
pub mod eigen;
pub mod linalg;
pub mod spinops;
