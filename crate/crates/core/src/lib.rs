pub mod augment;
pub mod cascade;
pub mod cli;
pub mod cluster;
pub mod config;
pub mod error;
pub mod evalkit;
pub mod flightlog;
pub mod geometry;
pub mod io;
pub mod mlp;
pub mod plot;
pub mod spectral;
pub mod svm;
pub mod synthgen;

pub use error::{Error, Result};
