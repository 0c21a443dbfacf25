//! Categorical compositional distributional semantics over pregroup grammar,
//! with functional-word tensors synthesized from word vectors by a linear
//! recursive tensor network.
//!
//! * [`grammar`]: pregroup types, contraction-only reduction, link diagrams.
//! * [`tensor`]: dense tensors, contraction and the Frobenius maps.
//! * [`composition`]: executing diagrams over word meanings, the tree-network
//!   compositionality functions, tensor builders and pronoun semantics.
//! * [`training`]: analytic gradients and plain SGD for the linear model.
//! * [`io_formats`]: JSON and JSON-lines files.

pub mod composition;
pub mod grammar;
pub mod io_formats;
pub mod tensor;
pub mod training;

pub use composition::{
    CompositionParams, Lexicon, LexiconEntry, SemanticsConfig, Squash, WordClass, WordMeaning,
};
pub use grammar::{Atom, LinkDiagram, PregroupType, SimpleType};
pub use tensor::{Tensor, TensorError};
pub use training::{ModelParams, Objective, TrainConfig, TrainExample};
