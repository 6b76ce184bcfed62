//! Morphological annotation of Korean text driven by directly maintainable
//! resources.
//!
//! The pipeline compiles stem lexicons, allomorph/derivation transducers
//! and suffix-sequence networks into a single minimal word-lexicon
//! transducer, then annotates text by emitting one analysis DAG per
//! sentence. An evaluator scores annotated output against hand-tagged
//! reference corpora with exact rational arithmetic.

pub mod allomorph;
pub mod annotate;
pub mod error;
pub mod eval;
pub mod graph;
pub mod hangul;
pub mod lexicon;
pub mod pipeline;
pub mod resource;
pub mod rtn;

pub use error::{Error, Result};
