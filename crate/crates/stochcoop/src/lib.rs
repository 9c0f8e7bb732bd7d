//! File formats, reports and the command-line front end for [`stochcoop_core`].

pub mod cli;
pub mod harness;
pub mod report;
pub mod schema;
pub mod selftest;
