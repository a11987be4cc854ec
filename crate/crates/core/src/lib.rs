//! Fractional Laplacian toolkit: the operator as a Fourier multiplier, as a
//! singular integral, and as the Dirichlet-to-Neumann map of degenerate
//! elliptic extension problems, plus a formal graded-series engine for the
//! curved-geometry identities the equivalences rest on.

pub mod config;
pub mod error;
pub mod extension;
pub mod fracparams;
pub mod jets;
pub mod runner;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use fracparams::{make_params, FracParams};
