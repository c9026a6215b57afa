//! 167-bit structural keys driven by a key-definition file.
//!
//! The default definitions are compiled in from `data/maccs_keys.txt`; the
//! `MOLCAP_KEYS` environment variable points [`keys_from_env`] at another
//! file in the same format:
//!
//! ```text
//! # molcap-keys v1
//! index | kind | pattern | threshold | description
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

use crate::elements;
use crate::smiles::MolecularGraph;
use crate::substructure::{count_matches, parse_query, QueryPattern};

pub const KEY_COUNT: usize = 167;
pub const PACKED_LEN: usize = KEY_COUNT.div_ceil(8);
pub const KEYS_ENV: &str = "MOLCAP_KEYS";
pub const FORMAT_HEADER: &str = "# molcap-keys v1";

const DEFAULT_KEYS: &str = include_str!("../data/maccs_keys.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaccsError {
    #[error("key {0} is not defined")]
    MissingKey(usize),
    #[error("key {0} is defined twice")]
    DuplicateKey(usize),
    #[error("key {index}: {detail}")]
    PatternParseError { index: usize, detail: String },
    #[error("line {line}: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("cannot read key file {path}: {detail}")]
    Io { path: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSpec {
    pub min: usize,
    pub max: Option<usize>,
    pub aromatic_only: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyKind {
    Pattern(QueryPattern),
    PatternCount(QueryPattern),
    ElementCount(Vec<u8>),
    RingSize(RingSpec),
    AlwaysZero { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyDefinition {
    pub index: usize,
    pub kind: KeyKind,
    /// Minimum count for the bit to be set.
    pub threshold: usize,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyVector {
    bits: [bool; KEY_COUNT],
}

impl KeyKind {
    pub fn name(&self) -> &'static str {
        match self {
            KeyKind::Pattern(_) => "pattern",
            KeyKind::PatternCount(_) => "pattern-count",
            KeyKind::ElementCount(_) => "element-count",
            KeyKind::RingSize(_) => "ring-size",
            KeyKind::AlwaysZero { .. } => "always-zero",
        }
    }

    pub fn query(&self) -> Option<&QueryPattern> {
        match self {
            KeyKind::Pattern(q) | KeyKind::PatternCount(q) => Some(q),
            _ => None,
        }
    }
}

impl RingSpec {
    fn parse(text: &str) -> Option<RingSpec> {
        let (aromatic_only, rest) = match text.strip_prefix('a') {
            Some(r) => (true, r),
            None => (false, text),
        };
        let (digits, open) = match rest.strip_suffix('+') {
            Some(d) => (d, true),
            None => (rest, false),
        };
        let min: usize = digits.parse().ok().filter(|&n| n >= 3)?;
        Some(RingSpec {
            min,
            max: if open { None } else { Some(min) },
            aromatic_only,
        })
    }

    fn accepts(&self, graph: &MolecularGraph, ring: &[usize]) -> bool {
        ring.len() >= self.min
            && self.max.is_none_or(|m| ring.len() <= m)
            && (!self.aromatic_only || ring.iter().all(|&a| graph.atom(a).aromatic))
    }
}

impl KeyDefinition {
    /// Raw count compared against the threshold, capped at the threshold for
    /// pattern keys.
    pub fn count(&self, graph: &MolecularGraph) -> usize {
        match &self.kind {
            KeyKind::Pattern(q) | KeyKind::PatternCount(q) => count_matches(graph, q, Some(self.threshold)).count,
            KeyKind::ElementCount(set) => graph.atoms().iter().filter(|a| set.contains(&a.element)).count(),
            KeyKind::RingSize(spec) => graph.rings().iter().filter(|r| spec.accepts(graph, r)).count(),
            KeyKind::AlwaysZero { .. } => 0,
        }
    }

    pub fn evaluate(&self, graph: &MolecularGraph) -> bool {
        !matches!(self.kind, KeyKind::AlwaysZero { .. }) && self.count(graph) >= self.threshold
    }
}

impl KeyVector {
    pub fn zeros() -> Self {
        KeyVector {
            bits: [false; KEY_COUNT],
        }
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn bits(&self) -> &[bool; KEY_COUNT] {
        &self.bits
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `'0'`/`'1'` per key, index 0 first.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Option<Self> {
        if s.len() != KEY_COUNT {
            return None;
        }
        let mut v = KeyVector::zeros();
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.bits[i] = true,
                _ => return None,
            }
        }
        Some(v)
    }

    /// Little-endian bit packing: key `i` is bit `i % 8` of byte `i / 8`.
    pub fn to_packed(&self) -> [u8; PACKED_LEN] {
        let mut out = [0u8; PACKED_LEN];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    pub fn from_packed(bytes: &[u8; PACKED_LEN]) -> Self {
        let mut v = KeyVector::zeros();
        for i in 0..KEY_COUNT {
            v.bits[i] = bytes[i / 8] >> (i % 8) & 1 == 1;
        }
        v
    }
}

impl Default for KeyVector {
    fn default() -> Self {
        Self::zeros()
    }
}

fn parse_elements(index: usize, text: &str) -> Result<Vec<u8>, MaccsError> {
    text.split(',')
        .map(|s| {
            elements::atomic_number(s.trim()).ok_or_else(|| MaccsError::PatternParseError {
                index,
                detail: format!("unknown element '{}'", s.trim()),
            })
        })
        .collect()
}

/// Parses key definitions from text in the documented line format.
pub fn parse_key_definitions(text: &str) -> Result<Vec<KeyDefinition>, MaccsError> {
    let mut slots: Vec<Option<KeyDefinition>> = vec![None; KEY_COUNT];
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |detail: &str| MaccsError::MalformedLine {
            line: line_no,
            detail: detail.to_string(),
        };
        let fields: Vec<&str> = line.splitn(5, '|').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(malformed("expected 5 '|' separated fields"));
        }
        let index: usize = fields[0].parse().map_err(|_| malformed("bad index"))?;
        if index >= KEY_COUNT {
            return Err(malformed("index out of range"));
        }
        let threshold: usize = fields[3].parse().map_err(|_| malformed("bad threshold"))?;
        if threshold == 0 {
            return Err(malformed("threshold must be at least 1"));
        }
        let pattern = fields[2];
        let query = || {
            parse_query(pattern).map_err(|e| MaccsError::PatternParseError {
                index,
                detail: e.to_string(),
            })
        };
        let kind = match fields[1] {
            "pattern" => KeyKind::Pattern(query()?),
            "pattern-count" => KeyKind::PatternCount(query()?),
            "element-count" => KeyKind::ElementCount(parse_elements(index, pattern)?),
            "ring-size" => {
                KeyKind::RingSize(RingSpec::parse(pattern).ok_or_else(|| MaccsError::PatternParseError {
                    index,
                    detail: format!("bad ring-size spec '{pattern}'"),
                })?)
            }
            "always-zero" => KeyKind::AlwaysZero {
                reason: pattern.to_string(),
            },
            other => return Err(malformed(&format!("unknown kind '{other}'"))),
        };
        if slots[index].is_some() {
            return Err(MaccsError::DuplicateKey(index));
        }
        slots[index] = Some(KeyDefinition {
            index,
            kind,
            threshold,
            description: fields[4].to_string(),
        });
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, d)| d.ok_or(MaccsError::MissingKey(i)))
        .collect()
}

pub fn load_key_definitions(path: &Path) -> Result<Vec<KeyDefinition>, MaccsError> {
    let text = std::fs::read_to_string(path).map_err(|e| MaccsError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    parse_key_definitions(&text)
}

/// The compiled-in definitions.
pub fn default_keys() -> &'static [KeyDefinition] {
    static KEYS: OnceLock<Vec<KeyDefinition>> = OnceLock::new();
    KEYS.get_or_init(|| parse_key_definitions(DEFAULT_KEYS).expect("shipped key file is valid"))
}

pub fn default_keys_text() -> &'static str {
    DEFAULT_KEYS
}

/// Definitions from `$MOLCAP_KEYS` if set, the compiled-in set otherwise.
pub fn keys_from_env() -> Result<Vec<KeyDefinition>, MaccsError> {
    match std::env::var_os(KEYS_ENV) {
        Some(path) => load_key_definitions(Path::new(&path)),
        None => Ok(default_keys().to_vec()),
    }
}

pub fn evaluate_keys(graph: &MolecularGraph, defs: &[KeyDefinition]) -> KeyVector {
    let mut v = KeyVector::zeros();
    for d in defs {
        if d.index < KEY_COUNT {
            v.bits[d.index] = d.evaluate(graph);
        }
    }
    v
}
