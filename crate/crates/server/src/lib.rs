//! HTTP API and command-line front end for fuzzyvis.
//!
//! The server keeps any number of independent ontology instances in memory.
//! Each one pairs a validated taxonomy with an operator family and, once an
//! embedding has been uploaded or generated, a cosine index for answering
//! composite-concept queries.

pub mod api;
pub mod cli;
pub mod error;
pub mod loader;
pub mod registry;
pub mod views;
