use crate::pauto::PautoViolation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("search budget exhausted after {used} nodes (limit {limit})")]
    BudgetExceeded { used: u64, limit: u64 },
    #[error("no non-cyclic orbit")]
    NoNonCyclicOrbit,
    #[error("orbit is not a quasi-cycle")]
    NotQuasiCycle,
    #[error("type descriptor does not describe a type over this tree")]
    InconsistentType,
    #[error("invalid partial automorphism: {0}")]
    Invalid(PautoViolation),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("automorphisms disagree on the base at {0:?}")]
    Agreement(String),
    #[error("closure did not settle within {rounds} rounds")]
    IterationCap { rounds: usize },
    #[error("search found nothing within its bounds: {0}")]
    NotFound(String),
}

impl From<PautoViolation> for Error {
    fn from(v: PautoViolation) -> Self {
        Error::Invalid(v)
    }
}
