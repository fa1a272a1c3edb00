pub mod cli;
pub mod config;
pub mod curve;
pub mod dsl;
pub mod eigen;
pub mod exec;
pub mod io;
pub mod lemmas;
pub mod error;
pub mod operator;
pub mod poly;
pub mod roots;
pub mod scaling;

pub use error::{Error, Result};
