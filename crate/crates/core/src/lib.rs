//! Compositional-behaviour test suites for machine translation.
//!
//! Generates synthetic and corpus-derived test pairs, sends them through a
//! translation backend, scores the outputs, and renders reports.

pub mod bridge;
pub mod corpus;
pub mod eval;
pub mod lexicon;
pub mod report;
pub mod suites;
pub mod templates;
pub mod text;
pub mod treegen;
