//! Hall MHD time integration and closed-form reference solutions.
//!
//! ```text
//! u_t = P[u x omega + J x B] + nu Lap u
//! B_t = curl((u - h J) x B) + eta Lap B
//! ```

pub mod checkpoint;
mod exact;
mod fit;
mod integrate;
mod rhs;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_b_only, write_checkpoint, Checkpoint,
};
pub use exact::{compare_to_exact, exact_at, ExactSolution, ERROR_FLOOR};
pub use fit::{fit_decay_rate, fit_power_law, DecayFit, MIN_FIT_SAMPLES};
pub use integrate::{
    run, run_with, step, Observer, RunOutput, StepEvent, Stepper, STABILITY_CHECK_EVERY,
};
pub use rhs::{hall_rhs, stability_bound, PhysicalParams, SimState};
