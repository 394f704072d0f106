use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("resonant frequency {0} with nonzero coefficient")]
    ResonantFrequency(i64),
    #[error("slope is not certified Diophantine: {0}")]
    NonDiophantineSlope(String),
    #[error("right-hand side has nonzero mean {0:.3e}")]
    NonzeroMean(f64),
    #[error("polynomial degree in z exceeds 2")]
    DegreeOverflow,
    #[error("not in normal form: {0}")]
    NotInNormalForm(String),
    #[error("L is not constant; the Diophantine normal form needs constant L")]
    NonConstantL,
    #[error("matrix is not unimodular for this lattice: {0}")]
    NonUnimodular(String),
    #[error("search bounds exceeded")]
    SearchBoundExceeded,
    #[error("map does not normalize the lattice: {0}")]
    NotLatticeNormalizing(String),
    #[error("arithmetic certificate missing: {0}")]
    CertificateMissing(String),
    #[error("generator incompatible with normal form: {0}")]
    IncompatibleNormalForm(String),
    #[error("verification failed at t = {t}: {reason}")]
    VerificationFailed { t: f64, reason: String },
    #[error("degenerate metric: {0}")]
    SingularMetric(String),
    #[error("invalid input: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
