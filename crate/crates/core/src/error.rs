use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: u32, found: u32 },
    #[error("polynomial is not homogeneous")]
    Inhomogeneous,
    #[error("cannot parse `{0}`")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rescaling by zero")]
    ZeroScale,
    #[error("c4 = 24 gives the Chazy-3 equation, not a Chazy-12 member")]
    NotChazy12,
    #[error("blow-up guard tripped at t = {t}")]
    BlowUp { t: f64 },
    #[error("evaluation point is a pole of h")]
    PoleHit,
    #[error("jet has {have} entries, the equation needs {need}")]
    JetTooShort { have: usize, need: usize },
    #[error("ct + d vanishes at t = {t}")]
    PoleOfAction { t: f64 },
    #[error("matrix is not unimodular (ad - bc = {0})")]
    NotUnimodular(String),
    #[error("transform has a zero diagonal entry at x{0}")]
    SingularTransform(usize),
    #[error("t = {t} lies outside the available range")]
    OutOfRange { t: f64 },
    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
