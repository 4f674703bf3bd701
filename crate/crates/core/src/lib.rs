pub mod artifacts;
pub mod cli;
pub mod datagen;
pub mod dictionary;
pub mod distance;
pub mod error;
pub mod eval;
pub mod features;
pub mod keyboard;
pub mod mlp;
pub mod mwe;
pub mod pipeline;
pub mod ranker;
pub mod service;
pub mod suggester;
pub mod text;
mod tsv;
