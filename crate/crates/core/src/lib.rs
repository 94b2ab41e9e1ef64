//! Spectral workbench for double Beltrami states of Hall MHD on the
//! periodic box `[-pi, pi]^3`.
//!
//! * [`spectral`]: transforms, curl, Leray projection, helical basis.
//! * [`fields`]: Beltrami constructors, the `(alpha, beta) <-> (lambda1, lambda2)`
//!   algebra and shell classification.
//! * [`diagnostics`]: energy, helicities, `Phi`/`Psi` deviations, CSV output.
//! * [`dynamics`]: Hall MHD right-hand side, integrating-factor RK4,
//!   closed-form solutions and checkpoints.
//! * [`variational`]: helicity-constrained energy minimization.
//! * [`verify`]: executable checks shared by the CLI and the test suite.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod spectral;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
