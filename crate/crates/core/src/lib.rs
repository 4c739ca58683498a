//! Company embeddings learned from the daily rank order of stock price moves.
//!
//! The crate is organised along the pipeline:
//!
//! * [`ingest`]: price-history and company-metadata CSVs into a [`ingest::ChangePanel`].
//! * [`corpus`]: one rank-ordered ticker "sentence" per trading day.
//! * [`sgns`]: skip-gram with negative sampling over the sentences.
//! * [`classify`]: from-scratch classifiers, splits, confusion matrices, permutation importance.
//! * [`stats`]: PCA, OLS with a full diagnostic summary, and the special functions behind p-values.
//! * [`pipeline`]: the dimensionality sweep, variance analysis and regression experiments.
//! * [`fixtures`]: the synthetic market generator used for the bundled fixtures.

pub mod classify;
pub mod corpus;
pub mod fixtures;
pub mod ingest;
pub mod pipeline;
pub mod sgns;
pub mod stats;

mod hashing;

pub use hashing::sha256_hex;
