//! Annotation region selection for whole-slide images guided by class
//! prototypes mined from image-caption corpora.
//!
//! The pipeline: find prototype images by caption keyword search or
//! text-to-image retrieval ([`captions`], [`retrieval`]), score every patch
//! of a slide against the prototypes ([`simmap`]), then pick a budget of
//! annotation regions ([`select`]). Random and diversity sampling baselines
//! and a coverage harness ([`eval`]) sit alongside.

pub mod captions;
pub mod error;
pub mod eval;
pub mod io;
pub mod retrieval;
pub mod rng;
pub mod select;
pub mod simmap;

pub use error::{Error, Result};
