//! Quadratic wave-interaction terms of the amplitude equations.
//!
//! The forcing on `A_m(k)` is
//!
//! ```text
//! sum_{m1, m2} int b(k1, k - k1; m1, m2 -> m) A_m1(k1) A_m2(k - k1) dk1
//! ```
//!
//! with `b` the projection of `-(u_1 . grad) u_2` onto the adjoint of mode
//! `m` at `k`. Two evaluation paths are provided: a precomputed tensor with
//! direct convolution (small validation grids only) and a pseudo-spectral
//! path that forms the products in physical space.

use std::sync::Arc;

use crate::amplitude::AmplitudeField;
use crate::error::Result;
use crate::linstab::EigenBasis;

pub mod product;
pub mod pseudo;
pub mod tensor;

pub use product::{convective_product, project, trapezoid_weight, Forcing};
pub use pseudo::PseudoSpectral;
pub use tensor::{coeff_b, InteractionTensor};

/// Nonlinear part of the amplitude equations.
pub trait NonlinearTerm {
    fn basis(&self) -> &Arc<EigenBasis>;

    /// Writes `dA/dt` from the nonlinear terms alone into `out`.
    fn eval(&mut self, state: &AmplitudeField, out: &mut AmplitudeField) -> Result<()>;
}
