//! Numerical laboratory for a point mass immersed in a one-dimensional viscous
//! barotropic fluid, written in Lagrangian mass coordinates.
//!
//! The crate contains a direct solver for the coupled system, the diffusion and
//! inter-diffusion wave approximations of its long-time behaviour, a Fourier
//! lab for the linearised fundamental solution, a quadrature oracle for the
//! weighted convolution inequalities, decay-rate fitting, and the CLI plumbing.

pub mod analysis;
pub mod cli;
pub mod diffusion;
pub mod error;
pub mod fsi;
pub mod greens;
pub mod interdiffusion;
pub mod io;
pub mod lemmas;
pub mod model;
pub mod quad;
pub mod scenario;
pub mod weights;

pub use error::{Error, Result};
pub use model::{FluidParams, MassPair};
