//! Verbatim quotation detection between the Greek Old and New Testaments.
//!
//! Words are compared by Strong's number (or a shared custom key when a word
//! has no annotation). Every 5-word window of the New Testament is matched
//! against every 5-word window of the Septuagint, matches on a shared
//! diagonal are merged into quotations, and the resulting per-book
//! quotation proportions drive Ward clustering and PCA of both testaments.

pub mod canon;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod ingest;
pub mod numerics;
pub mod pipeline;
pub mod reference;
pub mod report;

pub use canon::{BookId, Testament};
pub use corpus::{Book, Corpus, KeyKind, Token, TokenKey};
pub use error::{CorpusError, DetectError, IngestError, NumericsError, PipelineError};
