//! Parse SMILES strings and print atoms, rings and aromaticity.
//!
//! `cargo run --example parse_smiles -- 'c1ccccc1O' 'CC(=O)N'`

use molcap::elements::symbol;
use molcap::parse_smiles;

fn main() {
    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = vec![
            "C1=CC=CC=C1".into(),
            "c1ccccc1".into(),
            "CC(=O)Oc1ccccc1C(=O)O".into(),
            "C1CC1C(".into(),
        ];
    }
    for s in inputs {
        match parse_smiles(&s) {
            Ok(g) => {
                println!(
                    "{s}: {} heavy atoms, {} bonds, {} rings",
                    g.heavy_atom_count(),
                    g.bond_count(),
                    g.rings().len()
                );
                for a in g.atoms() {
                    println!(
                        "  {:>2} {:<2} H{} charge {:+} {}{}",
                        a.index,
                        symbol(a.element),
                        a.total_h(),
                        a.formal_charge,
                        if a.aromatic { "aromatic " } else { "" },
                        if a.in_ring { "ring" } else { "" }
                    );
                }
            }
            Err(e) => println!("{s}: {} error: {e}", e.kind()),
        }
    }
}
