//! Canonical forms for pure states of multipartite quantum systems under
//! local unitary transformations.
//!
//! The main entry point is [`canonical::canonicalize`], which brings a state of
//! `n >= 3` parts into a form where a prescribed family of coefficients
//! vanishes and another family is real and non-negative, and returns the local
//! unitaries that achieve it. Around it sit the product-state maximizer that
//! drives every construction step, a purely combinatorial checker for the
//! canonical-form conditions and orbit dimensions, the competing
//! marginal-eigenbasis and minimum-entropy forms, and independent oracles.

pub mod altforms;
pub mod canonical;
pub mod config;
pub mod error;
pub mod io;
pub mod linalg;
pub mod maximizer;
pub mod oracle;
pub mod orbit;
pub mod states;
pub mod tensor;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use tensor::{
    apply_local, environment, overlap, reduced_density, CMatrix, CVector, LocalUnitaryTuple, ModeShape,
    ProductVectorTuple, StateTensor,
};
