use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {0}: must be even and at least 8")]
    InvalidGrid(usize),

    #[error("grid mismatch: expected n={expected}, got n={found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("sample buffer has {found} points per component, expected {expected}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("inverse transform left an imaginary residue of {residue:e} (field is not real)")]
    ImaginaryResidue { residue: f64 },

    #[error("field has a nonzero mean mode; a constant field is not a curl on the torus")]
    NonzeroMeanNoPotential,

    #[error("helical basis is undefined at k = 0")]
    ZeroWavevector,

    #[error("field is not divergence-free (relative residual {residual:e})")]
    NotSolenoidal { residual: f64 },

    #[error("negative-order Sobolev norm requested for a field with nonzero mean")]
    NegativeOrderWithMean,

    #[error("complex curl eigenvalues: (alpha - beta)^2 = {disc_plus_four} < 4")]
    ComplexRoots { disc_plus_four: f64 },

    #[error("invalid ABC wavenumber {0}: must be a nonzero integer")]
    InvalidWavenumber(f64),

    #[error("shell |k|^2 = {0} contains no lattice points")]
    EmptyShell(u32),

    #[error("shell |k|^2 = {n} lies outside the dealiased band (cutoff {cutoff})")]
    ShellOutsideBand { n: u32, cutoff: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "field is not a Beltrami field with lambda = {lambda} (relative residual {residual:e})"
    )]
    NotBeltrami { lambda: f64, residual: f64 },

    #[error("|alpha - beta| = {gap} < 2: no real double Beltrami decomposition")]
    ClassificationGap { gap: f64 },

    #[error("non-finite values detected at t = {t}")]
    BlowupDetected { t: f64 },

    #[error("time step {dt} exceeds the stability bound {bound} at t = {t}")]
    StabilityViolated { dt: f64, bound: f64, t: f64 },

    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),

    #[error("negative evaluation time {0}")]
    NegativeTime(f64),

    #[error("closed-form double Beltrami evolution requires nu = eta (got nu={nu}, eta={eta})")]
    NuEtaMismatch { nu: f64, eta: f64 },

    #[error("decay fit needs at least {needed} samples in the window, got {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("decay fit requires positive samples, found {value} at t = {t}")]
    NonPositiveSample { t: f64, value: f64 },

    #[error("infeasible helicity targets: {0}")]
    InfeasibleTargets(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
