//! Error type shared by every analysis module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate basis: vectors are parallel or zero")]
    DegenerateBasis,

    #[error("no coincident supercell within max_area {max_area} A^2 and strain {max_strain}")]
    NoMatch { max_area: f64, max_strain: f64 },

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("ill-posed fit: {0}")]
    IllPosed(String),

    #[error("degenerate breadth: {0} component is zero within uncertainty")]
    DegenerateBreadth(&'static str),

    #[error("angle out of range: 2theta = {0} deg")]
    OutOfRange(f64),

    #[error("channel '{0}' has no positive counts")]
    AllZeroChannel(String),

    #[error("profile of '{0}' is not step-like")]
    MonotonicityViolation(String),

    #[error("time step {dt} s exceeds stability bound {bound} s")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("record outside rule domain: {0}")]
    OutOfDomain(String),

    #[error("decay window too short: covers {covered:.2} lifetimes, need 3")]
    WindowTooShort { covered: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
