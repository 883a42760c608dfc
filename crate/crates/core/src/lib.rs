//! Finite-dimensional symplectic linear algebra: Maslov indices of paths of
//! Lagrangian pairs, symplectic reduction, spectral flow, and boundary value
//! problems for first-order Hamiltonian systems.

pub mod bvp;
pub mod error;
pub mod linalg;
pub mod maslov;
pub mod random;
pub mod reduction;
pub mod spectral_flow;
pub mod symplectic;
pub mod verification;

pub use error::{Error, Result};
