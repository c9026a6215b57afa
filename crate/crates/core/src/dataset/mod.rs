//! Corpus ingestion, featurization, caching, class balancing, splits and
//! image augmentation.

mod augment;
mod cache;
mod corpus;
mod featurize;
mod split;
mod synthetic;

use thiserror::Error;

pub use augment::{augment_image, augment_image_with, AugmentParams, MAX_SHIFT};
pub use cache::{read_cache, sha256_hex, sha256_of, write_cache, CacheHeader, CACHE_MAGIC, CACHE_VERSION};
pub use corpus::{
    load_csv, load_csv_with, read_csv, LabeledMolecule, LoadedCorpus, Reject, DEFAULT_LABEL_COLUMN,
    DEFAULT_SMILES_COLUMN,
};
pub use featurize::{
    featurize_dataset, featurize_molecule, CaptionedExample, Exclusion, ExclusionReport, FeaturizeConfig, Featurized,
};
pub use split::{holdout_split, stratified_kfold, training_indices, upsample_minority, DatasetSplit};
pub use synthetic::{synthetic_labels, synthetic_oxygen_corpus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("input file has no data")]
    EmptyFile,
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("only one class present")]
    SingleClass,
    #[error("need at least {needed} examples of each class, found {found}")]
    TooFewExamples { needed: usize, found: usize },
    #[error("invalid split parameter: {0}")]
    InvalidSplit(String),
    #[error("bad dataset cache: {0}")]
    CacheFormat(String),
}

impl DatasetError {
    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        DatasetError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        }
    }
}
