//! Linear stability of circular Couette flow to axisymmetric disturbances.

pub mod band;
pub mod basis;
pub mod grid;
pub mod modes;
pub mod operator;

pub use band::{LinearProblem, NeutralBand};
pub use basis::{BasisKey, EigenBasis};
pub use grid::RadialGrid;
pub use modes::{EigenMode, Profiles, C64};
pub use operator::{assemble_operator, StabilityOperator};
