//! Finite-dimensional operator algebras: C*-covers, Shilov boundaries,
//! admissible actions and crossed products by finite groups.

pub mod algebra;
pub mod cb;
pub mod closure;
pub mod corpus;
pub mod covers;
pub mod crossed;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod partial;
pub mod report;
pub mod scenario;
pub mod structure;
pub mod suite;
pub mod tol;

pub use error::{Error, Result};
