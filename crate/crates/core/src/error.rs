use thiserror::Error;

/// Errors raised across parameter handling, spectral analysis, the
/// normal-form computation and the integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("missing parameter `{0}`")]
    MissingField(String),

    #[error("unknown parameter `{0}`")]
    UnknownField(String),

    #[error("parameter `{name}` is not a finite number")]
    NonFinite { name: String },

    #[error("parameter `{name}` = {value} violates {constraint}")]
    ConstraintViolation {
        name: String,
        value: f64,
        constraint: String,
    },

    #[error("variant constraint violated: {0}")]
    VariantConstraint(String),

    #[error("malformed config: {0}")]
    Config(String),

    #[error("equilibrium denominator vanishes ({0:e})")]
    SingularEquilibrium(f64),

    #[error(
        "psi consistency fails: lambda_e* = {lambda_star} but lambda_e = {lambda_e} \
         (|diff| = {diff:e})"
    )]
    InconsistentPsi {
        lambda_star: f64,
        lambda_e: f64,
        diff: f64,
    },

    #[error("no positive root of h(z) (case {case}); no imaginary-axis crossing")]
    NoCrossing { case: String },

    #[error("acos argument {arg} outside [-1, 1]")]
    AcosDomain { arg: f64 },

    #[error("characteristic residual {residual:e} exceeds tolerance at omega={omega}, tau={tau}")]
    ResidualCheckFailed { omega: f64, tau: f64, residual: f64 },

    #[error("h'(z0) = {h_prime:e} vanishes; crossing is not transversal")]
    DegenerateCrossing { h_prime: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigenvector normalization degenerate (|denominator| = {0:e})")]
    DegenerateNormalization(f64),

    #[error("{system} system is singular (|det| = {det:e})")]
    SingularSystem { system: &'static str, det: f64 },

    #[error("Re lambda'(tau_k) vanishes")]
    ZeroTransversality,

    #[error("step too large: only {m} steps per delay interval (need at least 4)")]
    StepTooLarge { m: usize },

    #[error("window of {steps} steps is too short (need at least 5)")]
    WindowTooShort { steps: usize },

    #[error("trajectory does not oscillate ({crossings} mean crossings)")]
    NoOscillation { crossings: usize },
}

impl Error {
    /// Short machine-readable tag, used for CSV error columns.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::MissingField(_) => "MissingField",
            Error::UnknownField(_) => "UnknownField",
            Error::NonFinite { .. } => "NonFinite",
            Error::ConstraintViolation { .. } => "ConstraintViolation",
            Error::VariantConstraint(_) => "VariantConstraint",
            Error::Config(_) => "Config",
            Error::SingularEquilibrium(_) => "SingularEquilibrium",
            Error::InconsistentPsi { .. } => "InconsistentPsi",
            Error::NoCrossing { .. } => "NoCrossing",
            Error::AcosDomain { .. } => "AcosDomain",
            Error::ResidualCheckFailed { .. } => "ResidualCheckFailed",
            Error::DegenerateCrossing { .. } => "DegenerateCrossing",
            Error::InvalidInput(_) => "InvalidInput",
            Error::DegenerateNormalization(_) => "DegenerateNormalization",
            Error::SingularSystem { .. } => "SingularSystem",
            Error::ZeroTransversality => "ZeroTransversality",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::WindowTooShort { .. } => "WindowTooShort",
            Error::NoOscillation { .. } => "NoOscillation",
        }
    }

    /// True for errors caused by the supplied configuration itself, as
    /// opposed to a failed analysis precondition.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::MissingField(_)
                | Error::UnknownField(_)
                | Error::NonFinite { .. }
                | Error::ConstraintViolation { .. }
                | Error::VariantConstraint(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
