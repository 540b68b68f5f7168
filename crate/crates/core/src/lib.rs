//! Secure storage codes over graphs.
//!
//! A storage graph has `K` independent sources. Each edge `{Vi, Vj}` is labelled
//! with the set of sources it must recover (of size `0` or `M`), and must learn
//! nothing about the others. Nodes may share a common key `Z`; the source key
//! rate is `L / L_Z`.
//!
//! The crate decides when the best achievable rate is exactly `1/M` (or when no
//! key is needed at all), builds linear codes meeting those rates, and verifies
//! arbitrary linear codes against the correctness and security constraints.

pub mod analysis;
pub mod build;
pub mod classify;
pub mod code;
pub mod corpus;
pub mod error;
pub mod field;
pub mod graph;
pub mod source;
pub mod verify;

pub use analysis::{analyze, ComponentAnalysis};
pub use build::{build, BuildMode, BuildOptions};
pub use classify::{classify, Capacity, ClassificationResult, Regime, Witness};
pub use code::{CodeKind, KeyRate, LinearSecureCode};
pub use error::{Error, GraphError, Result};
pub use field::{FieldMatrix, PrimeField};
pub use graph::{EdgeId, NodeId, StorageGraph};
pub use source::SourceSet;
pub use verify::{verify, VerificationReport, VerifyOptions};
