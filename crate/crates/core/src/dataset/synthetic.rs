use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabeledMolecule;

const PLAIN_UNITS: &[&str] = &[
    "C", "CC", "C(C)", "C(C)C", "N", "C(N)", "c1ccccc1", "C1CC1", "C(Cl)", "S", "C=C", "C(F)",
];
const OXYGEN_UNITS: &[&str] = &["O", "C(=O)", "CO", "C(O)", "OC", "C(=O)N"];

/// Small random molecules labelled 1 exactly when they contain oxygen.
/// Roughly half are positive.
pub fn synthetic_oxygen_corpus(n: usize, seed: u64) -> Vec<LabeledMolecule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(2..=5);
            let mut units: Vec<&str> = (0..len).map(|_| *PLAIN_UNITS.choose(&mut rng).unwrap()).collect();
            let label = rng.gen_bool(0.5) as u8;
            if label == 1 {
                let at = rng.gen_range(0..=units.len());
                units.insert(at, OXYGEN_UNITS.choose(&mut rng).unwrap());
            }
            LabeledMolecule {
                smiles: units.concat(),
                label,
            }
        })
        .collect()
}

/// `n` labels with exactly `positives` ones at seeded random positions.
pub fn synthetic_labels(n: usize, positives: usize, seed: u64) -> Vec<u8> {
    let mut labels: Vec<u8> = (0..n).map(|i| (i < positives) as u8).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::OXYGEN;
    use crate::smiles::parse_smiles;

    #[test]
    fn labels_mean_oxygen() {
        let corpus = synthetic_oxygen_corpus(300, 5);
        let positives = corpus.iter().filter(|m| m.label == 1).count();
        assert!((100..200).contains(&positives));
        for m in &corpus {
            let g = parse_smiles(&m.smiles).unwrap_or_else(|e| panic!("{}: {e}", m.smiles));
            let has_o = g.atoms().iter().any(|a| a.element == OXYGEN);
            assert_eq!(has_o, m.label == 1, "{}", m.smiles);
        }
        assert_eq!(synthetic_oxygen_corpus(10, 5), synthetic_oxygen_corpus(10, 5));
    }

    #[test]
    fn label_counts() {
        let l = synthetic_labels(1000, 37, 1);
        assert_eq!(l.iter().filter(|&&x| x == 1).count(), 37);
    }
}
