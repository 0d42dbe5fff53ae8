//! Shared error type. Anything a caller can trigger with legal-but-bad input
//! is an `Error`; internal invariant breaks are panics.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("group closure exceeded bound {bound} elements")]
    ClosureTooLarge { bound: usize },
    #[error("group of order {order} exceeds bound {bound}")]
    TooLarge { order: usize, bound: usize },
    #[error("subgroup enumeration exceeded bound {bound}")]
    SubgroupBoundExceeded { bound: usize },
    #[error("elements do not lie in the expected group")]
    GroupMismatch,
    #[error("{0} is not a subgroup of {1}")]
    NotSubgroup(String, String),
    #[error("not a Sylow {p}-subgroup: {reason}")]
    NotSylow { p: u64, reason: String },
    #[error("biset is not left-free (witness element {witness})")]
    NotLeftFree { witness: usize },
    #[error("biset orbit admits no (K, phi) description: right stabilizer nontrivial")]
    NotClassifiable,
    #[error("cochain degree {degree} out of range (complex built to degree {max})")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("complex too large: degree {degree} needs about {entries} matrix entries (budget {budget})")]
    DegreeTooLarge { degree: usize, entries: usize, budget: usize },
    #[error("map is not equivariant: violated at group element {element}")]
    EquivarianceViolated { element: usize },
    #[error("sequence is not exact: {0}")]
    NotExact(String),
    #[error("linking-system axiom {axiom} violated: {detail}")]
    AxiomViolation { axiom: char, detail: String },
    #[error("local system violates relation: morphisms {f} then {g} compose to {gf}")]
    RelationViolated { f: usize, g: usize, gf: usize },
    #[error("assignment does not generate: morphism {morphism} unreached")]
    NotGenerating { morphism: usize },
    #[error("|Omega|/|S| = {value} is not a unit mod p = {p}")]
    NonUnitScalar { value: u64, p: u64 },
    #[error("action is not nilpotent: fixed points vanish on a nonzero quotient (layer {layer})")]
    NotNilpotent { layer: usize },
    #[error("no Alperin factorization found")]
    FactorizationNotFound,
    #[error("morphism is not in the fusion system")]
    NotFusionMorphism,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
