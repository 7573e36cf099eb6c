//! catkit builds document-category corpora from community-annotated sources
//! (Wikipedia dumps, Stack Exchange sites, Reddit posts), turns them into
//! binary training examples with negative sampling, trains lightweight
//! document-category scorers, and evaluates weakly supervised text
//! classification over fixed label sets.

pub mod community;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod ioutil;
pub mod sampler;
pub mod scorer;
pub mod text;
pub mod wiki;

pub mod cli;

pub use error::{Error, Result};

/// Tool version recorded in run manifests and model files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
