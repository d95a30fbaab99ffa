use alloc::string::String;

/// Errors raised by the analysis pipeline.
///
/// Every variant except [`Error::Invariant`] (possibly wrapped in
/// [`Error::Context`]) describes invalid input or configuration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("corpus needs at least 2 periods, found {found}")]
    TooFewPeriods { found: usize },
    #[error("period `{label}` contains no tokens")]
    EmptyPeriod { label: String },
    #[error("period labels must be strictly increasing: `{previous}` then `{next}`")]
    PeriodOrder { previous: String, next: String },
    #[error("no word satisfies min_count = {min_count} in every period")]
    EmptyVocabulary { min_count: u64 },
    #[error("co-occurrence matrix for period {period} has no pairs")]
    NoCooccurrences { period: usize },
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("not enough eligible words: {0}")]
    InsufficientWords(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Whether this error signals a broken internal invariant rather than bad input.
    pub fn is_invariant(&self) -> bool {
        match self {
            Error::Invariant(_) => true,
            Error::Context { source, .. } => source.is_invariant(),
            _ => false,
        }
    }

    /// Wrap with a description of where the error happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: alloc::boxed::Box::new(self),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
