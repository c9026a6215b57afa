use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LabeledMolecule;
use crate::fingerprint::{morgan_fingerprint, Fingerprint, DEFAULT_BITS, DEFAULT_RADIUS};
use crate::imaging::{render, ChemImage, DEFAULT_SIDE};
use crate::maccs::{evaluate_keys, KeyDefinition, KeyVector};
use crate::smiles::parse_smiles;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeaturizeConfig {
    pub side: usize,
    pub fp_bits: usize,
    pub radius: u32,
}

impl Default for FeaturizeConfig {
    fn default() -> Self {
        FeaturizeConfig {
            side: DEFAULT_SIDE,
            fp_bits: DEFAULT_BITS,
            radius: DEFAULT_RADIUS,
        }
    }
}

/// An image captioned with a fingerprint and a key vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptionedExample {
    pub image: ChemImage,
    pub fingerprint: Fingerprint,
    pub keys: KeyVector,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    /// Position in the input list.
    pub index: usize,
    pub smiles: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExclusionReport {
    pub exclusions: Vec<Exclusion>,
}

impl ExclusionReport {
    pub fn counts_by_reason(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for e in &self.exclusions {
            *m.entry(e.reason.clone()).or_insert(0) += 1;
        }
        m
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["smiles", "reason"])?;
        for e in &self.exclusions {
            out.write_record([e.smiles.as_str(), e.reason.as_str()])?;
        }
        out.flush()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Featurized {
    pub examples: Vec<CaptionedExample>,
    /// Input position of each example.
    pub source_indices: Vec<usize>,
    pub report: ExclusionReport,
}

impl Featurized {
    pub fn labels(&self) -> Vec<u8> {
        self.examples.iter().map(|e| e.label).collect()
    }
}

/// Featurizes one SMILES string; the error is the exclusion reason.
pub fn featurize_molecule(
    smiles: &str,
    config: &FeaturizeConfig,
    keys: &[KeyDefinition],
) -> Result<(ChemImage, Fingerprint, KeyVector), &'static str> {
    let graph = parse_smiles(smiles).map_err(|e| e.kind())?;
    let fingerprint = morgan_fingerprint(&graph, config.radius, config.fp_bits).map_err(|_| "InvalidWidth")?;
    let key_vector = evaluate_keys(&graph, keys);
    let image = render(&graph, config.side).map_err(|e| e.kind())?;
    Ok((image, fingerprint, key_vector))
}

/// Featurizes in parallel; output order follows input order.
pub fn featurize_dataset(mols: &[LabeledMolecule], config: &FeaturizeConfig, keys: &[KeyDefinition]) -> Featurized {
    let results: Vec<_> = mols
        .par_iter()
        .map(|m| featurize_molecule(&m.smiles, config, keys))
        .collect();
    let mut out = Featurized::default();
    for (index, (m, r)) in mols.iter().zip(results).enumerate() {
        match r {
            Ok((image, fingerprint, keys)) => {
                out.examples.push(CaptionedExample {
                    image,
                    fingerprint,
                    keys,
                    label: m.label,
                });
                out.source_indices.push(index);
            }
            Err(reason) => out.report.exclusions.push(Exclusion {
                index,
                smiles: m.smiles.clone(),
                reason: reason.to_string(),
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maccs::default_keys;

    fn mols(smiles: &[&str]) -> Vec<LabeledMolecule> {
        smiles
            .iter()
            .map(|s| LabeledMolecule {
                smiles: s.to_string(),
                label: 0,
            })
            .collect()
    }

    #[test]
    fn small_molecules() {
        let f = featurize_dataset(&mols(&["C", "CCO"]), &FeaturizeConfig::default(), default_keys());
        assert_eq!(f.examples.len(), 2);
        assert!(f.report.exclusions.is_empty());
        let e = &f.examples[1];
        assert_eq!(e.image.side(), 60);
        assert_eq!(e.fingerprint.nbits(), 2048);
        assert!(e.keys.get(164));
    }

    #[test]
    fn exclusions_are_counted() {
        let long = "C".repeat(100);
        let f = featurize_dataset(
            &mols(&["CC", &long, "C1CC", "CCN"]),
            &FeaturizeConfig::default(),
            default_keys(),
        );
        assert_eq!(f.source_indices, vec![0, 3]);
        assert_eq!(f.report.exclusions[0].reason, "DoesNotFit");
        assert_eq!(f.report.exclusions[1].reason, "UnclosedRingBond");
        assert_eq!(f.report.counts_by_reason().get("DoesNotFit"), Some(&1));
        let mut buf = Vec::new();
        f.report.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("smiles,reason\n"));
    }
}
