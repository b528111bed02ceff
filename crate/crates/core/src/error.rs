use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element does not live in the ambient {0}")]
    AmbientMismatch(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("span is not closed under multiplication")]
    NotAlgebra,
    #[error("not a C*-algebra: {0}")]
    NotCstar(String),
    #[error("element is not in the algebra (residual {0:.3e})")]
    NotMember(f64),
    #[error("eigenvalue clustering stayed ambiguous after retries")]
    AmbiguousSpectrum,
    #[error("structure mismatch: {0}")]
    Structure(String),
    #[error("map is not a homomorphism (residual {0:.3e})")]
    NotHomomorphism(f64),
    #[error("map is not completely isometric: {0}")]
    NotCompletelyIsometric(String),
    #[error("image does not generate the cover algebra ({got} of {want})")]
    DoesNotGenerate { got: usize, want: usize },
    #[error("map is not injective")]
    NotInjective,
    #[error("not a cover morphism: {0}")]
    NoMorphism(String),
    #[error("group table is invalid: {0}")]
    BadGroup(String),
    #[error("action is invalid: {0}")]
    BadAction(String),
    #[error("system is not admissible for this cover")]
    NotAdmissible,
    #[error("Shilov ideal is not maximal ({0} envelope blocks)")]
    ShilovNotMaximal(usize),
    #[error("partial action axiom failed: {0}")]
    PartialAxiom(String),
    #[error("word budget exhausted")]
    WordBudget,
    #[error("input error: {0}")]
    Input(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
