//! Numerical toolkit for anisotropic Orlicz-type elliptic problems and their
//! comparison with radially symmetric problems under Schwarz symmetrization.

pub mod aniso_fd;
pub mod comparison;
pub mod error;
pub mod numeric;
pub mod radial_solver;
pub mod symmetrize;
pub mod young;

pub use error::{Error, Result};
