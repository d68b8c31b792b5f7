//! Measures how likely a causal language model is to reproduce code smells.
//!
//! The pipeline turns analyzer reports into a curated dataset of located
//! smell instances ([`dataset`]), scores each instance from a teacher-forced
//! token trace ([`trace`], [`psc`]), and summarizes and compares models with
//! bootstrap statistics ([`stats`]). [`bench`] wires the steps into commands.

pub mod bench;
pub mod dataset;
pub mod error;
pub mod psc;
pub mod rng;
pub mod scores;
pub mod span;
pub mod stats;
pub mod summary;
pub mod trace;

pub use error::{Error, Result};
