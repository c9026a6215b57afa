//! Circular (Morgan) fingerprints: environments, folded bits and hex form.

use molcap::fingerprint::{morgan_fingerprint, morgan_iterate, DEFAULT_BITS};

fn main() {
    let smiles = std::env::args().nth(1).unwrap_or_else(|| "CCO".to_string());
    let graph = molcap::parse_smiles(&smiles).expect("valid SMILES");
    for env in morgan_iterate(&graph, 2) {
        println!(
            "atom {} radius {} hash {:016x} bonds {:?}",
            env.center, env.radius, env.hash, env.bond_set
        );
    }
    let fp = morgan_fingerprint(&graph, 2, DEFAULT_BITS).expect("power-of-two width");
    println!(
        "{smiles}: {} of {} bits set: {:?}",
        fp.popcount(),
        fp.nbits(),
        fp.ones().collect::<Vec<_>>()
    );
    let half = fp.fold_half().expect("foldable");
    println!("folded to {} bits: {:?}", half.nbits(), half.ones().collect::<Vec<_>>());
    println!("hex prefix {}", &fp.to_hex()[..32]);
}
