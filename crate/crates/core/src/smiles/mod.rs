//! SMILES tokenizer and parser producing ring- and aromaticity-annotated
//! molecular graphs.
//!
//! Supported: organic-subset atoms, bracket atoms (isotope, charge, H count,
//! atom class), bonds `- = # :`, branches, ring closures including `%nn`,
//! and `.` separated fragments. Stereo markers (`/ \ @`) are accepted and
//! dropped.

mod aromaticity;
mod graph;
mod parse;
mod rings;
mod tokenize;

use thiserror::Error;

pub use graph::{Atom, AtomSpec, Bond, BondOrder, GraphBuilder, MolecularGraph};
pub use parse::parse_smiles;
pub use tokenize::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("unknown character at byte {position}")]
    UnknownCharacter { position: usize },
    #[error("unterminated bracket atom starting at byte {position}")]
    UnterminatedBracket { position: usize },
    #[error("ring bond {digit} is never closed")]
    UnclosedRingBond { digit: u32 },
    #[error("unbalanced branch at byte {position}")]
    UnbalancedBranch { position: usize },
    #[error("atom {atom} exceeds its allowed valence")]
    InvalidValence { atom: usize },
    #[error("unsupported element '{symbol}' at byte {position}")]
    UnsupportedElement { symbol: String, position: usize },
    #[error("malformed bracket atom at byte {position}")]
    InvalidBracketAtom { position: usize },
    #[error("unexpected token at byte {position}")]
    UnexpectedToken { position: usize },
    #[error("duplicate bond at byte {position}")]
    DuplicateBond { position: usize },
    #[error("empty SMILES")]
    Empty,
}

impl SmilesError {
    /// Short machine-readable reason used in exclusion reports.
    pub fn kind(&self) -> &'static str {
        match self {
            SmilesError::UnknownCharacter { .. } => "UnknownCharacter",
            SmilesError::UnterminatedBracket { .. } => "UnterminatedBracket",
            SmilesError::UnclosedRingBond { .. } => "UnclosedRingBond",
            SmilesError::UnbalancedBranch { .. } => "UnbalancedBranch",
            SmilesError::InvalidValence { .. } => "InvalidValence",
            SmilesError::UnsupportedElement { .. } => "UnsupportedElement",
            SmilesError::InvalidBracketAtom { .. } => "InvalidBracketAtom",
            SmilesError::UnexpectedToken { .. } => "UnexpectedToken",
            SmilesError::DuplicateBond { .. } => "DuplicateBond",
            SmilesError::Empty => "Empty",
        }
    }
}

/// Recomputes the SSSR and ring flags of a graph.
pub fn perceive_rings(mut graph: MolecularGraph) -> MolecularGraph {
    rings::perceive_rings(&mut graph);
    graph
}

/// Re-runs Hückel aromaticity over the graph's current rings.
pub fn perceive_aromaticity(mut graph: MolecularGraph) -> MolecularGraph {
    aromaticity::perceive_aromaticity(&mut graph);
    graph
}
