use alloc::string::String;

use crate::model::Vartype;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("expected {what} of length {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("expected a {expected} model, found {found}")]
    WrongVartype { expected: Vartype, found: Vartype },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("model carries no encoding metadata")]
    MissingMeta,
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("search space of {size} configurations exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration error: {0}")]
    Config(String),
}
