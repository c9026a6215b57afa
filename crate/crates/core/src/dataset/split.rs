use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DatasetError;

/// `k` disjoint folds of example indices covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

fn class_indices(labels: &[u8]) -> (Vec<usize>, Vec<usize>) {
    let pos = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let neg = (0..labels.len()).filter(|&i| labels[i] != 1).collect();
    (pos, neg)
}

/// Stratified k-fold: each class is shuffled and dealt round-robin, the
/// negatives continuing where the positives stopped so fold sizes differ by
/// at most one.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<DatasetSplit, DatasetError> {
    if k < 2 {
        return Err(DatasetError::InvalidSplit(format!("k = {k}, need at least 2")));
    }
    let (mut pos, mut neg) = class_indices(labels);
    let smallest = pos.len().min(neg.len());
    if smallest < k {
        return Err(DatasetError::TooFewExamples {
            needed: k,
            found: smallest,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (i, &p) in pos.iter().enumerate() {
        folds[i % k].push(p);
    }
    let offset = pos.len() % k;
    for (i, &n) in neg.iter().enumerate() {
        folds[(offset + i) % k].push(n);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(DatasetSplit { folds, seed })
}

/// Every index outside fold `fold`, ascending.
pub fn training_indices(split: &DatasetSplit, fold: usize) -> Vec<usize> {
    let mut v: Vec<usize> = split
        .folds
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != fold)
        .flat_map(|(_, f)| f.iter().copied())
        .collect();
    v.sort_unstable();
    v
}

/// Stratified single split; returns `(train, test)` with about
/// `test_fraction` of each class in the test part.
pub fn holdout_split(labels: &[u8], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::InvalidSplit(format!("test fraction {test_fraction}")));
    }
    let (mut pos, mut neg) = class_indices(labels);
    if pos.len().min(neg.len()) < 2 {
        return Err(DatasetError::TooFewExamples {
            needed: 2,
            found: pos.len().min(neg.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let cut = |n: usize| ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let (cp, cn) = (cut(pos.len()), cut(neg.len()));
    let mut test: Vec<usize> = pos[..cp].iter().chain(&neg[..cn]).copied().collect();
    let mut train: Vec<usize> = pos[cp..].iter().chain(&neg[cn..]).copied().collect();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Returns `indices` followed by minority-class indices drawn with
/// replacement until both classes are equally represented.
pub fn upsample_minority(indices: &[usize], labels: &[u8], seed: u64) -> Result<Vec<usize>, DatasetError> {
    let pos: Vec<usize> = indices.iter().copied().filter(|&i| labels[i] == 1).collect();
    let neg: Vec<usize> = indices.iter().copied().filter(|&i| labels[i] != 1).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(DatasetError::SingleClass);
    }
    let deficit = pos.len().abs_diff(neg.len());
    let minority = if pos.len() < neg.len() { pos } else { neg };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = indices.to_vec();
    out.extend((0..deficit).map(|_| minority[rng.gen_range(0..minority.len())]));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(pos: usize, total: usize) -> Vec<u8> {
        (0..total).map(|i| (i < pos) as u8).collect()
    }

    #[test]
    fn five_folds_of_twenty() {
        let l = labels(20, 100);
        let s = stratified_kfold(&l, 5, 3).unwrap();
        for f in &s.folds {
            assert_eq!(f.len(), 20);
            assert_eq!(f.iter().filter(|&&i| l[i] == 1).count(), 4);
        }
        let mut all: Vec<usize> = s.folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn two_folds_of_two() {
        let l = vec![1, 0, 1, 0];
        let s = stratified_kfold(&l, 2, 0).unwrap();
        for f in &s.folds {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().filter(|&&i| l[i] == 1).count(), 1);
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let l = labels(13, 71);
        assert_eq!(stratified_kfold(&l, 5, 9), stratified_kfold(&l, 5, 9));
        assert_ne!(stratified_kfold(&l, 5, 9), stratified_kfold(&l, 5, 10));
        assert!(matches!(stratified_kfold(&l, 1, 0), Err(DatasetError::InvalidSplit(_))));
        assert_eq!(
            stratified_kfold(&labels(3, 50), 5, 0),
            Err(DatasetError::TooFewExamples { needed: 5, found: 3 })
        );
    }

    #[test]
    fn upsampling() {
        let l = labels(2, 12);
        let idx: Vec<usize> = (0..12).collect();
        let up = upsample_minority(&idx, &l, 1).unwrap();
        let pos = up.iter().filter(|&&i| l[i] == 1).count();
        assert_eq!((up.len() - pos, pos), (10, 10));
        assert!(up[12..].iter().all(|&i| i < 2));
        let bal = labels(6, 12);
        assert_eq!(upsample_minority(&idx, &bal, 1).unwrap(), idx);
        assert_eq!(upsample_minority(&idx, &[0; 12], 1), Err(DatasetError::SingleClass));
    }

    #[test]
    fn holdout() {
        let l = labels(20, 100);
        let (train, test) = holdout_split(&l, 0.2, 4).unwrap();
        assert_eq!(test.len(), 20);
        assert_eq!(test.iter().filter(|&&i| l[i] == 1).count(), 4);
        assert_eq!(train.len() + test.len(), 100);
    }
}
