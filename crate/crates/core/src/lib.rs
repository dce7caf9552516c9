//! Exact redundancy detection for linear inequality systems in dictionary form.

pub mod brute;
pub mod certificates;
pub mod clarkson;
pub mod detection;
pub mod error;
pub mod generators;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod pivot;

pub use error::{Error, Result};
pub use lp::{build_initial_dictionary, Dictionary, LpInstance, Rat, Var};
pub use oracle::{DictionaryOracle, RationalOracle, Sign, SignMatrix};
