use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("singular linear system (det = {det:e})")]
    SingularSystem { det: f64 },

    #[error("states are identical (|K| = 1)")]
    DegenerateStates,

    #[error("argument out of domain: {0}")]
    DomainError(String),

    #[error("states do not span three dimensions (radicand {radicand:e})")]
    RankDeficient { radicand: f64 },

    #[error("no relabeling satisfies the canonical ordering")]
    NoCanonicalForm,

    #[error("operator has zero trace")]
    ZeroOperator,

    #[error("no globally optimal sequential measurement: {0}")]
    NotGloballyOptimal(String),

    #[error("certificate violated at {label} ({check}): margin {margin:e}")]
    CertificateViolation { label: String, check: String, margin: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
}
