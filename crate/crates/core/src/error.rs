use thiserror::Error;

/// Errors raised while reading or validating models and inputs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: undeclared variable `{name}`")]
    UndeclaredVariable {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("{line}:{column}: value `{value}` is not in the domain of `{variable}`")]
    ValueOutsideDomain {
        line: usize,
        column: usize,
        variable: String,
        value: String,
    },
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("requirement id `{0}` clashes with a knowledge-base constraint")]
    IdClash(String),
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("variable `{0}` has more than 64 values")]
    DomainTooLarge(String),
    #[error("variable `{variable}` lists value `{value}` twice")]
    DuplicateValue { variable: String, value: String },
    #[error("no requirements given")]
    EmptyRequirements,
    #[error("the knowledge base is inconsistent on its own")]
    InconsistentKnowledgeBase,
    #[error("constraint id `{0}` is not part of the preference order")]
    UnknownId(String),
    #[error("preference order is not a permutation of the requirement ids")]
    InvalidOrder,
}

/// Errors raised by the diagnosis algorithms and oracles.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosisError {
    #[error("background constraints are inconsistent")]
    InconsistentBackground,
    #[error("brute-force enumeration is capped at {cap} requirements, got {actual}")]
    SizeCapExceeded { cap: usize, actual: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("could not generate a feasible instance after {0} attempts")]
    RetryBudgetExhausted(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}
