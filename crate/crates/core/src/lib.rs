pub mod cli;
pub mod config;
pub mod copula;
pub mod data;
pub mod entropy;
pub mod error;
pub mod mi;
pub mod monitor;
pub mod numerics;
pub mod quadrature;
pub mod report;
pub mod selection;
pub mod synth;
pub mod valuation;

pub use error::{Error, Result};
