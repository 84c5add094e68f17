use thiserror::Error;

use crate::element::ElementId;
use crate::tournament::TournamentReport;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("duplicate element {0}")]
    DuplicateElement(ElementId),
    #[error("element {0} is not part of the element set")]
    ForeignElement(ElementId),
    #[error("element sets differ")]
    ElementSetMismatch,
    #[error("expected {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("positions are not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("label {label} for element {id} is not 0 or 1")]
    BadLabel { id: ElementId, label: u8 },
    #[error("inconsistent tournament: {0}")]
    InconsistentTournament(TournamentReport),
    #[error("invalid weight function: {0}")]
    InvalidWeight(String),
    #[error("k = {k} is out of range for n = {n}")]
    KOutOfRange { k: usize, n: usize },
}
