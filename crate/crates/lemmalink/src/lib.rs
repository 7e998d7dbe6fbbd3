//! Lexicon and corpus linking on top of `lemmalink-core`: file formats,
//! the in-memory store with its on-disk directory, corpus linking, and the
//! HTTP service.

pub mod corpus;
pub mod error;
pub mod formats;
pub mod io;
pub mod persist;
pub mod service;
pub mod store;

pub use corpus::{CorpusCoverage, CorpusDescriptor, LinkReport};
pub use error::{FieldError, IngestReport, RowError, StoreError};
pub use persist::DataDir;
pub use store::{
    CandidateBatch, Format, IngestOptions, LemmaOverrides, LexiconDescriptor, MatchMode, NewLemma,
    SearchFilters, Store,
};
