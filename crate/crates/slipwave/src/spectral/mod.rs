//! Discrete function spaces: the horizontal Fourier lattice, vertical
//! Chebyshev collocation, transforms and norms.

pub mod chebyshev;
pub mod field;
pub mod grid;
pub mod norms;
pub mod transform;

pub use chebyshev::Chebyshev;
pub use field::{frequency_filter, FrequencyFilter, StripSpectrum, SurfaceSpectrum};
pub use grid::Grid;
pub use norms::{korn_ratio, norm_hs, norm_xs, seminorm_hdot_minus1, Seminorm, SobolevNorm, XsNorm};
pub use transform::{forward_transform, inverse_transform};
