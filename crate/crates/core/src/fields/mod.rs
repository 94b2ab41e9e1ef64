//! Beltrami fields, shell eigenfields and double Beltrami states.

mod algebra;
mod construct;
mod double;

pub use algebra::{alpha_beta, lambda_pair};
pub use construct::{
    abc_flow, is_admissible_shell, random_solenoidal, shell_field, shell_points,
    trig_shell_example, Shell, ShellAmplitudes,
};
pub use double::{
    classify, make_double_beltrami, verify_double_beltrami, BeltramiComponent,
    ClassificationReport, DoubleBeltramiSpec, DoubleBeltramiState, ResidualReport, ShellContent,
    ShellShare, BELTRAMI_TOL, CLASSIFY_RESIDUAL_TOL, COMPLEMENT_TOL,
};
