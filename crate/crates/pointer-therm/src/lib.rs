//! Command-line front end for the pointer-basis thermalization simulator:
//! configuration, sweeps over coupling strength, CSV output and the
//! acceptance checks.

pub mod config;
pub mod experiments;
pub mod table;
pub mod verify;
