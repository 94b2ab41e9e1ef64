//! Fourier-grid machinery on `[-pi, pi]^3`: transforms, differential
//! operators, the Leray projector, inverse curl and the helical basis.

mod fft;
pub mod field;
pub mod grid;
pub mod helical;
pub mod ops;

pub(crate) use field::{forward_pair, inverse_pair};
pub use field::{
    forward_transform, forward_transform_on, inverse_transform, PhysicalVectorField,
    SpectralVectorField,
};
pub use grid::{norm2, GridSpec, BOX_VOLUME};
pub use helical::{helical_basis, helical_decompose, helical_recompose, HelicalCoefficients};
pub use ops::{
    cross_physical, curl_hat, dealias, inhomogeneous_norm, invert_curl, leray_project, sobolev_norm,
};
