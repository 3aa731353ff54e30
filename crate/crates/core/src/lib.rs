//! Iterative, LLM-driven feature engineering for tabular classification.
//!
//! Candidate features are written in a small closed expression language
//! ([`fedsl`]), executed over a columnar [`tabular::Table`], and kept only
//! when they improve a downstream classifier across repeated validation
//! splits ([`engine`]).

pub mod engine;
pub mod fedsl;
pub mod llm;
pub mod models;
pub mod par;
pub mod prompt;
pub mod rng;
pub mod tabular;
