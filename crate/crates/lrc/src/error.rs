use thiserror::Error;

/// Errors shared by the tree, distance, and solver operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("duplicate label '{label}' at byte {offset}")]
    DuplicateLabel { label: String, offset: usize },
    #[error("non-binary vertex at byte {offset}")]
    NonBinary { offset: usize },
    #[error("internal node label at byte {offset}")]
    InternalLabel { offset: usize },
    #[error("invalid label '{text}': labels are nonempty strings over [A-Za-z0-9_.-]")]
    InvalidLabel { text: String },
    #[error("label '{0}' does not occur in the tree")]
    UnknownLabel(String),
    #[error("label sets differ; symmetric difference: {{{0}}}")]
    LabelSetMismatch(String),
    #[error("node {0} does not name an edge of the tree")]
    InvalidEdge(usize),
    #[error("node id {0} is out of range")]
    InvalidNode(usize),
    #[error("{0}")]
    InvalidOperation(String),
    #[error("operation needs at least 3 leaves")]
    TooFewLeaves,
    #[error("input contains no trees")]
    EmptyInput,
    #[error("{n} labels exceed the exhaustive enumeration limit of {limit}; pass allow_large to override")]
    EnumerationGuard { n: usize, limit: usize },
    #[error("trees are {distance} apart, above the kernel budget {budget}")]
    KernelBudget { distance: u32, budget: u32 },
    #[error("no disagreement of size at most {0} exists once the moved label is fixed")]
    InfeasibleBranch(u32),
    #[error("the removed trees are incompatible")]
    Incompatible,
}
