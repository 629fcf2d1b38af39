use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty word")]
    EmptyWord,
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),
    #[error("letter {letter} outside 1..={n}")]
    InvalidLetter { letter: u8, n: usize },
    #[error("vector is not a unit vector (norm² = {0})")]
    NotUnit(String),
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("code is not prefix-free: {0} is a prefix of {1}")]
    NotPrefixFree(String, String),
    #[error("element is not an isometry in O_n^+")]
    NotIsometry,
    #[error("moment system is inconsistent")]
    Inconsistent,
    #[error("tail of the sandwich series cannot be certified: {0}")]
    TailNotCertified(String),
    #[error("presentation failed validation: {0}")]
    ValidationFailed(String),
    #[error("subspace is not invariant under s_i*")]
    NotInvariant,
    #[error("representation not in catalog: {0}")]
    NotInCatalog(String),
    #[error("schema error at {field}: {msg}")]
    Schema { field: String, msg: String },
    #[error("positivity gate failed (min eigenvalue {min_eig})")]
    GateFailed { min_eig: f64 },
    #[error("horizon of {0} letters exceeded")]
    HorizonExceeded(usize),
    #[error("grid index overflow")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn schema(field: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Schema {
        field: field.into(),
        msg: msg.into(),
    }
}
