//! Command-line front end for the curvature library: an expression
//! mini-language for algebra elements, byte-deterministic report
//! documents, and the `ncg` command dispatch.

pub mod expr;
pub mod report;
pub mod run;
pub mod selftest;
