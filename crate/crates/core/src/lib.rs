//! Password strength and entropy estimation.
//!
//! - [`charspace`]: the 94-character space and per-class password profiles.
//! - [`metrics`]: Expectation entropy plus Hartley, Shannon, min- and
//!   guessing entropy.
//! - [`estimators`]: MCV, collision, Markov, compression and tuple
//!   min-entropy estimators for symbol and bit sequences.
//! - [`corpus`]: corpus and sample-file ingestion, empirical CDFs and
//!   CSV/JSON reports.
//! - [`generator`]: uniform random and leaked-like password corpora.
//!
//! Data-parallel loops run on rayon when the `parallel` feature (on by
//! default) is enabled; see [`Execution`].

pub mod charspace;
pub mod corpus;
pub mod estimators;
pub mod exec;
pub mod generator;
pub mod metrics;

pub use charspace::{CharClass, CharSpace, CharSpaceError, ClassProfile};
pub use corpus::{CdfSeries, Corpus, CorpusError, ReportFormat, SampleFormat};
pub use estimators::{EstimateError, EstimateResult, EstimatorKind, SampleSequence};
pub use exec::Execution;
pub use generator::{GenLabel, GenSpec, GeneratorError};
pub use metrics::{Distribution, MetricsError, PasswordScore};
