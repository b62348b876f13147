//! Nonlinear Taylor-Couette instability by Fourier-eigenfunction expansion.
//!
//! The disturbance velocity is expanded in axial Fourier components and, at
//! each axial wavenumber, in the linear-stability eigenfunctions of circular
//! Couette flow. Projecting the Navier-Stokes equations onto the adjoint
//! eigenfunctions yields evolution equations for the amplitude densities
//! `A_m(k, t)`, coupled only through quadratic wave interactions.

pub mod amplitude;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod interaction;
pub mod kslab;
pub mod linstab;
pub mod meanflow;
pub mod scenarios;

pub use error::{Error, Result};
