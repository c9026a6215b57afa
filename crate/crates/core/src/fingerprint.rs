//! Folded circular (Morgan) fingerprints.
//!
//! Hashes are byte-exact and documented here so other implementations can
//! reproduce them:
//!
//! * radius 0: FNV-1a 64 over six bytes
//!   `[element, heavy_degree, charge as i8, total_h, in_ring, aromatic]`
//!   (counts saturate at 255, charge clamps to the i8 range);
//! * radius r: FNV-1a 64 over `r as u32` (LE), the atom's previous hash
//!   (LE), then each neighbor as `(bond code u8, neighbor previous hash LE)`
//!   with pairs sorted ascending. Bond codes are 1 single, 2 double,
//!   3 triple, 4 aromatic.
//!
//! Radius-0 environments are deduplicated by hash. An environment of radius
//! r ≥ 1 is dropped if its covered bond set is empty or equals the bond set of
//! an environment from a smaller radius. Among same-radius environments with
//! one bond set, the smallest hash is kept (then the smallest center), so the
//! retained bits do not depend on atom numbering.

use std::collections::HashSet;

use thiserror::Error;

use crate::smiles::MolecularGraph;

pub const DEFAULT_RADIUS: u32 = 2;
pub const DEFAULT_BITS: usize = 2048;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("fingerprint width {0} is not a power of two of at least 8")]
    InvalidWidth(usize),
    #[error("malformed fingerprint hex string")]
    InvalidHex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomEnvironment {
    pub center: usize,
    pub radius: u32,
    pub hash: u64,
    /// Sorted bond indices.
    pub bond_set: Vec<usize>,
}

/// Fixed-width bit vector; bit `i` lives in byte `i / 8` at position `i % 8`
/// (least significant first).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    bytes: Vec<u8>,
    nbits: usize,
    radius: u32,
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Radius-0 hash per atom.
pub fn initial_invariants(graph: &MolecularGraph) -> Vec<u64> {
    (0..graph.atom_count())
        .map(|i| {
            let a = graph.atom(i);
            let tuple = [
                a.element,
                graph.heavy_degree(i).min(255) as u8,
                a.formal_charge.clamp(i8::MIN as i32, i8::MAX as i32) as i8 as u8,
                a.total_h().min(255) as u8,
                a.in_ring as u8,
                a.aromatic as u8,
            ];
            fnv1a(&tuple)
        })
        .collect()
}

/// All retained environments up to `radius`, in (radius, center) order.
pub fn morgan_iterate(graph: &MolecularGraph, radius: u32) -> Vec<AtomEnvironment> {
    let n = graph.atom_count();
    let mut hashes = initial_invariants(graph);
    let mut out = Vec::new();
    let mut seen_hashes = HashSet::new();
    for (center, &hash) in hashes.iter().enumerate() {
        if seen_hashes.insert(hash) {
            out.push(AtomEnvironment {
                center,
                radius: 0,
                hash,
                bond_set: Vec::new(),
            });
        }
    }

    // Per-center frontier state for growing bond sets.
    let mut covered: Vec<Vec<bool>> = vec![vec![false; graph.bond_count()]; n];
    let mut visited: Vec<Vec<bool>> = (0..n)
        .map(|c| {
            let mut v = vec![false; n];
            v[c] = true;
            v
        })
        .collect();
    let mut frontier: Vec<Vec<usize>> = (0..n).map(|c| vec![c]).collect();
    let mut seen_sets: HashSet<Vec<usize>> = HashSet::new();

    for r in 1..=radius {
        let mut next = Vec::with_capacity(n);
        for (i, &own) in hashes.iter().enumerate() {
            let mut pairs: Vec<(u8, u64)> = graph
                .neighbors(i)
                .iter()
                .map(|&(nb, b)| (graph.bond(b).order.code(), hashes[nb]))
                .collect();
            pairs.sort_unstable();
            let mut bytes = Vec::with_capacity(12 + pairs.len() * 9);
            bytes.extend_from_slice(&r.to_le_bytes());
            bytes.extend_from_slice(&own.to_le_bytes());
            for (code, h) in pairs {
                bytes.push(code);
                bytes.extend_from_slice(&h.to_le_bytes());
            }
            next.push(fnv1a(&bytes));
        }
        hashes = next;

        let mut round = Vec::new();
        for center in 0..n {
            let mut grown = Vec::new();
            for &u in &frontier[center] {
                for &(nb, b) in graph.neighbors(u) {
                    covered[center][b] = true;
                    if !visited[center][nb] {
                        visited[center][nb] = true;
                        grown.push(nb);
                    }
                }
            }
            frontier[center] = grown;
            let bond_set: Vec<usize> = covered[center]
                .iter()
                .enumerate()
                .filter_map(|(b, &c)| c.then_some(b))
                .collect();
            if !bond_set.is_empty() && !seen_sets.contains(&bond_set) {
                round.push(AtomEnvironment {
                    center,
                    radius: r,
                    hash: hashes[center],
                    bond_set,
                });
            }
        }
        round.sort_by_key(|e| (e.hash, e.center));
        let mut kept: Vec<AtomEnvironment> = round
            .into_iter()
            .filter(|e| seen_sets.insert(e.bond_set.clone()))
            .collect();
        kept.sort_by_key(|e| e.center);
        out.extend(kept);
    }
    out
}

/// Sets bit `hash mod nbits` for each environment.
pub fn fold_to_bits(envs: &[AtomEnvironment], nbits: usize) -> Result<Fingerprint, FingerprintError> {
    let mut fp = Fingerprint::zeros(nbits)?;
    for env in envs {
        fp.set((env.hash % nbits as u64) as usize);
        fp.radius = fp.radius.max(env.radius);
    }
    Ok(fp)
}

pub fn morgan_fingerprint(graph: &MolecularGraph, radius: u32, nbits: usize) -> Result<Fingerprint, FingerprintError> {
    let mut fp = fold_to_bits(&morgan_iterate(graph, radius), nbits)?;
    fp.radius = radius;
    Ok(fp)
}

impl Fingerprint {
    pub fn zeros(nbits: usize) -> Result<Self, FingerprintError> {
        if nbits < 8 || !nbits.is_power_of_two() {
            return Err(FingerprintError::InvalidWidth(nbits));
        }
        Ok(Fingerprint {
            bytes: vec![0; nbits / 8],
            nbits,
            radius: 0,
        })
    }

    pub fn from_bytes(bytes: Vec<u8>, radius: u32) -> Result<Self, FingerprintError> {
        let nbits = bytes.len() * 8;
        Self::zeros(nbits)?;
        Ok(Fingerprint { bytes, nbits, radius })
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn get(&self, bit: usize) -> bool {
        self.bytes[bit / 8] >> (bit % 8) & 1 == 1
    }

    pub fn set(&mut self, bit: usize) {
        self.bytes[bit / 8] |= 1 << (bit % 8);
    }

    pub fn popcount(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&i| self.get(i))
    }

    /// ORs the upper half onto the lower half.
    pub fn fold_half(&self) -> Result<Fingerprint, FingerprintError> {
        let half = self.nbits / 2;
        let mut out = Fingerprint::zeros(half)?;
        for i in self.ones() {
            out.set(i % half);
        }
        out.radius = self.radius;
        Ok(out)
    }

    /// Lowercase hex, two characters per byte in byte order.
    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(hex: &str, radius: u32) -> Result<Self, FingerprintError> {
        if !hex.len().is_multiple_of(2) || !hex.is_ascii() {
            return Err(FingerprintError::InvalidHex);
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| FingerprintError::InvalidHex))
            .collect::<Result<Vec<u8>, _>>()?;
        Self::from_bytes(bytes, radius)
    }
}
