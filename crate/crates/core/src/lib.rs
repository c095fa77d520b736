//! Daily mean similarity scores between a tweet corpus and target words.
//!
//! The pipeline ingests dated tweets, cleans and tokenizes them per UTC day,
//! embeds the day's top words or sentences through a pluggable backend, and
//! averages their cosine similarity to each target word. Reports are written
//! as CSV and SVG.

pub mod clean;
pub mod config;
pub mod embed;
pub mod error;
pub mod ingest;
pub mod lexical;
pub mod pipeline;
pub mod report;
pub mod scoring;
pub mod synth;

pub use error::{Category, Error, Result};
