//! Command-line front end and file formats for the registration toolkit.
//!
//! The numeric work lives in `bioreg-core`; this crate adds what a shipped
//! tool needs around it:
//!
//! - [`raster`]: the BIOREG1 container (images, displacement fields, mask
//!   sets) with canonical, byte-stable serialization
//! - [`report`]: deterministic JSON run reports
//! - [`cli`]: the `bioreg` command-line surface (clap)
//! - [`commands`]: subcommand implementations as testable functions
//! - [`error`]: error categories and process exit codes

#![forbid(unsafe_code)]

pub mod cli;
pub mod commands;
pub mod error;
pub mod raster;
pub mod report;
