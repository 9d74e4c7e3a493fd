use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("vanishing coupling product {which}·C0: coefficients B± and Be± are undefined")]
    VanishingCoupling { which: &'static str },

    #[error("degenerate noise quadratic: total weight 𝔹² is zero")]
    DegenerateQuadratic,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid frequency grid: {0}")]
    Grid(String),

    #[error("at Ω = {omega} rad/s: {source}")]
    AtFrequency {
        omega: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("simulation config: {0}")]
    SimConfig(String),

    #[error("simulation diverged in trajectory {trajectory} at t = {time} s")]
    Diverged { trajectory: usize, time: f64 },

    #[error("spectral estimate: {0}")]
    Psd(String),

    #[error("comparison: {0}")]
    Compare(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(omega: f64, source: Error) -> Self {
        Error::AtFrequency {
            omega,
            source: Box::new(source),
        }
    }

    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
