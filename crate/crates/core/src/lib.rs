//! Finite-difference pricing of American options with exact tridiagonal
//! LCP solvers.

pub mod discretization;
pub mod error;
pub mod grid;
pub mod pricer;
pub mod solvers;

pub use error::{Error, Result};
