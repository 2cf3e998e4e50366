//! Position-weighted multinomial Naive Bayes for document sentiment polarity.
//!
//! Attributes (words and adjacent word pairs) get fractional counts that grow
//! linearly with their position in the document, so that opinions expressed
//! near the end weigh more. A sentence-level subjectivity classifier can move
//! subjective sentences toward the end of a review, or drop objective ones,
//! before the polarity classifier sees it. The [`eval`] module runs the
//! cross-validation protocols used to measure all of this.

pub mod corpus;
pub mod eval;
pub mod features;
pub mod nbayes;
pub mod subjectivity;
pub mod synthetic;

use std::path::{Path, PathBuf};

pub use corpus::{Document, LabeledCorpus, Polarity, Sentence, Subjectivity, Token};
pub use eval::{EvalReport, ExperimentConfig, SweepResult};
pub use features::{Attribute, AttributeVector, NgramOrders, OccurrenceRule, SchemeFamily, WeightScheme};
pub use nbayes::{ClassLabel, NbModel};
pub use subjectivity::{SubjectivityModel, TransformMode};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("attribute {0} is not in the model vocabulary")]
    UnknownAttribute(String),
    #[error("class `{0}` has no training documents")]
    EmptyClass(&'static str),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_owned(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
