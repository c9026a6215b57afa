//! Captioned molecular images.
//!
//! Molecules given as SMILES are turned into three aligned featurizations:
//! a single-channel 2D raster, a folded circular fingerprint and a 167-bit
//! structural key vector. A small CPU neural-network kernel trains a fused
//! image + caption binary classifier on them, and the metrics module scores
//! it with rank-based ROC AUC under stratified cross-validation.

pub mod cli;
pub mod dataset;
pub mod elements;
pub mod fingerprint;
pub mod imaging;
pub mod maccs;
pub mod metrics;
pub mod nn;
pub mod smiles;
pub mod substructure;

pub use smiles::{parse_smiles, MolecularGraph};

/// Bumped whenever any featurizer changes its output; part of the dataset
/// cache key.
pub const FEATURIZER_VERSION: u32 = 1;
