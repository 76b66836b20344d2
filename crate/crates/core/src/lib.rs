//! Planning and simulation toolkit for C+L band colorless, directionless and
//! contentionless ROADM nodes and small test networks.

pub mod commands;
pub mod config;
pub mod devices;
pub mod error;
pub mod impairment;
pub mod network;
pub mod node;
pub mod report;
pub mod spectrum;

pub use error::{Error, Result};
