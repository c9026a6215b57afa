//! Featurize a labelled corpus, write the cache and build stratified folds.
//!
//! With a path argument the synthetic corpus is also written as CSV, ready
//! for `molcap featurize --in <path>`.

use molcap::dataset::{
    featurize_dataset, read_cache, sha256_of, stratified_kfold, synthetic_oxygen_corpus, training_indices,
    upsample_minority, write_cache, FeaturizeConfig,
};
use molcap::maccs::default_keys;

fn main() {
    let corpus = synthetic_oxygen_corpus(200, 1);
    if let Some(path) = std::env::args().nth(1) {
        let mut w = csv::Writer::from_path(&path).expect("create csv");
        w.write_record(["smiles", "HIV_active"]).unwrap();
        for m in &corpus {
            w.write_record([m.smiles.as_str(), &m.label.to_string()]).unwrap();
        }
        w.flush().unwrap();
        println!("wrote {path}");
    }
    let config = FeaturizeConfig::default();
    let feats = featurize_dataset(&corpus, &config, default_keys());
    println!(
        "{} examples, exclusions {:?}",
        feats.examples.len(),
        feats.report.counts_by_reason()
    );

    let dir = tempfile_dir();
    let cache = dir.join("synthetic.cache");
    let digest = sha256_of(corpus.iter().map(|m| m.smiles.as_str()).collect::<String>().as_bytes());
    write_cache(&cache, &digest, &config, &feats.examples).unwrap();
    let (header, back) = read_cache(&cache).unwrap();
    println!(
        "cache: {} records, featurizer v{}",
        header.count, header.featurizer_version
    );
    assert_eq!(back, feats.examples);

    let labels = feats.labels();
    let split = stratified_kfold(&labels, 5, 7).unwrap();
    for (k, fold) in split.folds.iter().enumerate() {
        let train = training_indices(&split, k);
        let up = upsample_minority(&train, &labels, 7).unwrap();
        let pos = up.iter().filter(|&&i| labels[i] == 1).count();
        println!(
            "fold {k}: {} held out ({} positive), train {} -> {} after upsampling ({pos} positive)",
            fold.len(),
            fold.iter().filter(|&&i| labels[i] == 1).count(),
            train.len(),
            up.len()
        );
    }
    std::fs::remove_dir_all(dir).ok();
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("molcap-example-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
