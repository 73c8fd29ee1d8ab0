//! Finite stand-ins for fast-growing sequences, nested estimators,
//! bounded well-foundedness search and finite games, each checked against an
//! independent brute-force oracle.

pub mod corpus;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod fastgrow;
pub mod formulas;
pub mod games;
pub mod oracles;
pub mod rate;
pub mod wellfounded;

pub use error::{Error, Result};
