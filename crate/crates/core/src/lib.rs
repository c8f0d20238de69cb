//! Evolutionary optimization of keyword search queries.
//!
//! A genetic algorithm evolves a population of keyword queries drawn from a
//! subject-domain pattern. Each query runs against a [`search::SearchBackend`];
//! each result is scored by rank (`g`), universality across the population's
//! queries (`p`) and tf-idf cosine similarity to the pattern (`s`), and the
//! three are combined as `w_g·g + w_p·p + w_s·s`. The [`weights`] module
//! derives the coefficients analytically from logged runs, and
//! [`experiment`] turns runs into logs and fitness curves.

pub mod error;
pub mod experiment;
pub mod fitness;
pub mod genetics;
pub mod search;
pub mod text;
pub mod weights;

pub use error::{Error, Result};
