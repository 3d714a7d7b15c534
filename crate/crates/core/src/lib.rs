//! Predicting which member of a synonym set will become the most frequent,
//! from historical unigram counts.

pub mod corpus;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod experiments;
pub mod features;
pub mod io;
pub mod lexicon;
pub mod model;
pub mod pipeline;

pub use error::{Error, Result};
