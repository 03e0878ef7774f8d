//! Flattened geometry and the nonlinear residual.

pub mod curvature;
pub mod flattening;
pub mod forcing;
pub mod padded;
pub mod residual;
pub mod slip;

pub use curvature::mean_curvature;
pub use flattening::{build_flattening, cutoff, cutoff_derivative, FlatteningMaps};
pub use forcing::{pullback, ForcingSpec, Recipe};
pub use residual::eval_xi;
pub use slip::{slip_check, slip_check_map, SlipLaw, SlipReport};
