//! Universal sequential outlier hypothesis testing over finite alphabets.

pub mod distributions;
pub mod error;
pub mod exponents;
pub mod harness;
pub mod hypothesis;
pub mod sequential;
pub mod spam;

pub use distributions::{Alphabet, Distribution, TypeVector};
pub use error::{Error, Result};
pub use hypothesis::{Hypothesis, HypothesisSpace, Model};
pub use sequential::{Horizon, Knowledge, TestConfig, TestResult};
