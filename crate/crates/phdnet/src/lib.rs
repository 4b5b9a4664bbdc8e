//! Doctoral hiring records in, discipline reputation analytics out.
//!
//! The pipeline turns first-appointment hiring records into a weighted
//! directed exchange network between institutions (employer -> awarding
//! unit, self-loops retained), scores each institution's reputation with
//! max-normalized eigenvector centrality, and layers the statistical
//! apparatus on top: hiring-structure predictor panels, least squares with
//! the full diagnostic table, rank correlation against external evaluations,
//! time-sliced network series, and a synthetic hierarchy-market generator
//! for end-to-end testing.
//!
//! Modules follow the pipeline stages:
//!
//! - [`ingest`]: parse, validate, canonicalize and deduplicate records
//! - [`graph`]: build, slice, summarize, export, synthesize networks
//! - [`centrality`]: reputation scores on one network or a series
//! - [`stats`]: predictor panels, OLS diagnostics, correlation, trends

pub mod centrality;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod stats;

pub use error::{Error, Result};
