use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dielectric constant {0}: must exceed 1")]
    InvalidDielectric(f64),

    #[error("domain error: {name} = {value} ({requirement})")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("division by zero detuning: {0} must be nonzero")]
    ZeroDetuning(&'static str),

    #[error("degenerate configuration: gamma = (omega^2 - omega_tilde^2)/delta vanishes, spin-spin strength undefined")]
    DegenerateSpinSpin,

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("unknown factor label `{0}`")]
    UnknownFactor(String),

    #[error("layout mismatch between operands")]
    LayoutMismatch,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid basis label for factor `{factor}`: {detail}")]
    InvalidLabel { factor: String, detail: String },

    #[error("operator is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("invalid evolution request: {0}")]
    InvalidRequest(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("Fock truncation too small: {0}")]
    Truncation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            requirement: "must be positive and finite",
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            requirement: "must be non-negative and finite",
        })
    }
}
