pub mod cdf;
pub mod cli;
pub mod config;
pub mod decomposition;
pub mod dependence;
pub mod error;
pub mod experiments;
pub mod innovations;
pub mod mixture;
pub mod oscillation;
pub mod process;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod selftest;
pub mod stats;

pub use error::{Error, Result};
