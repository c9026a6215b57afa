//! Binary cache of featurized examples.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "MOLCAPDS" | format u32 | featurizer u32 | corpus sha256 [32]
//! side u32 | fp_bits u32 | radius u32 | n_keys u32 | count u64
//! count × (label u8 | side² × f32 | fp_bits/8 bytes | 21 key bytes)
//! ```

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{CaptionedExample, DatasetError, FeaturizeConfig};
use crate::fingerprint::Fingerprint;
use crate::imaging::ChemImage;
use crate::maccs::{KeyVector, KEY_COUNT, PACKED_LEN};

pub const CACHE_MAGIC: &[u8; 8] = b"MOLCAPDS";
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheHeader {
    pub featurizer_version: u32,
    pub corpus_sha256: [u8; 32],
    pub config: FeaturizeConfig,
    pub count: u64,
}

impl CacheHeader {
    /// Whether this cache was built from `corpus_sha256` by the current
    /// featurizer with `config`.
    pub fn matches(&self, corpus_sha256: &[u8; 32], config: &FeaturizeConfig) -> bool {
        self.featurizer_version == crate::FEATURIZER_VERSION
            && &self.corpus_sha256 == corpus_sha256
            && &self.config == config
    }
}

pub fn sha256_hex(bytes: &[u8; 32]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_of(data: &[u8]) -> [u8; 32] {
    Sha256::digest(data).into()
}

pub fn write_cache(
    path: &Path,
    corpus_sha256: &[u8; 32],
    config: &FeaturizeConfig,
    examples: &[CaptionedExample],
) -> Result<(), DatasetError> {
    let io = |e: std::io::Error| DatasetError::io(path, e);
    let mut w = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let mut head = Vec::with_capacity(72);
    head.extend_from_slice(CACHE_MAGIC);
    head.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    head.extend_from_slice(&crate::FEATURIZER_VERSION.to_le_bytes());
    head.extend_from_slice(corpus_sha256);
    for v in [
        config.side as u32,
        config.fp_bits as u32,
        config.radius,
        KEY_COUNT as u32,
    ] {
        head.extend_from_slice(&v.to_le_bytes());
    }
    head.extend_from_slice(&(examples.len() as u64).to_le_bytes());
    w.write_all(&head).map_err(io)?;
    for ex in examples {
        if ex.image.side() != config.side || ex.fingerprint.nbits() != config.fp_bits {
            return Err(DatasetError::CacheFormat(
                "example does not match header dimensions".into(),
            ));
        }
        let mut rec = Vec::with_capacity(1 + 4 * config.side * config.side + config.fp_bits / 8 + PACKED_LEN);
        rec.push(ex.label);
        for v in ex.image.pixels() {
            rec.extend_from_slice(&v.to_le_bytes());
        }
        rec.extend_from_slice(ex.fingerprint.as_bytes());
        rec.extend_from_slice(&ex.keys.to_packed());
        w.write_all(&rec).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N], DatasetError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| DatasetError::CacheFormat(format!("truncated: {e}")))?;
    Ok(b)
}

fn take_u32(r: &mut impl Read) -> Result<u32, DatasetError> {
    Ok(u32::from_le_bytes(take::<4>(r)?))
}

pub fn read_cache(path: &Path) -> Result<(CacheHeader, Vec<CaptionedExample>), DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| DatasetError::io(path, e))?;
    let mut r = BufReader::new(file);
    if &take::<8>(&mut r)? != CACHE_MAGIC {
        return Err(DatasetError::CacheFormat("bad magic".into()));
    }
    let version = take_u32(&mut r)?;
    if version != CACHE_VERSION {
        return Err(DatasetError::CacheFormat(format!(
            "unsupported format version {version}"
        )));
    }
    let featurizer_version = take_u32(&mut r)?;
    let corpus_sha256 = take::<32>(&mut r)?;
    let side = take_u32(&mut r)? as usize;
    let fp_bits = take_u32(&mut r)? as usize;
    let radius = take_u32(&mut r)?;
    let n_keys = take_u32(&mut r)? as usize;
    let count = u64::from_le_bytes(take::<8>(&mut r)?);
    if n_keys != KEY_COUNT || !fp_bits.is_multiple_of(8) || side == 0 || side > 4096 {
        return Err(DatasetError::CacheFormat("unsupported dimensions".into()));
    }
    let header = CacheHeader {
        featurizer_version,
        corpus_sha256,
        config: FeaturizeConfig { side, fp_bits, radius },
        count,
    };
    let mut examples = Vec::new();
    let mut pix = vec![0u8; 4 * side * side];
    let mut fp = vec![0u8; fp_bits / 8];
    for _ in 0..count {
        let [label] = take::<1>(&mut r)?;
        r.read_exact(&mut pix)
            .map_err(|e| DatasetError::CacheFormat(format!("truncated: {e}")))?;
        r.read_exact(&mut fp)
            .map_err(|e| DatasetError::CacheFormat(format!("truncated: {e}")))?;
        let keys = take::<PACKED_LEN>(&mut r)?;
        let pixels = pix
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        examples.push(CaptionedExample {
            image: ChemImage::from_pixels(side, pixels).expect("sized buffer"),
            fingerprint: Fingerprint::from_bytes(fp.clone(), radius)
                .map_err(|e| DatasetError::CacheFormat(e.to_string()))?,
            keys: KeyVector::from_packed(&keys),
            label,
        });
    }
    if r.read(&mut [0u8; 1]).map_err(|e| DatasetError::io(path, e))? != 0 {
        return Err(DatasetError::CacheFormat("trailing bytes".into()));
    }
    Ok((header, examples))
}
