//! File formats, batch runners and the `unreliable` command-line tool built
//! on [`unreliable_core`].
//!
//! Structured reports are JSON and anything plottable is CSV. Every output
//! file carries a metadata block (full parameters, seed, crate version and
//! RNG identity) so a run can be repeated from the file alone, and every
//! float is written with 17 significant digits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod output;
pub mod replicate;
pub mod verify;

pub use unreliable_core as core;
