pub mod alloc;
pub mod cluster;
pub mod dsl;
pub mod mdp;
pub mod optimize;
pub mod report;
pub mod tasks;

/// Errors surfaced by the planning pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at {0}")]
    Syntax(#[from] dsl::SyntaxError),
    #[error("invalid problem: {0}")]
    Validation(#[from] dsl::ValidationError),
}
