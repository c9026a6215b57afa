//! Count SMARTS-style pattern matches in a molecule.
//!
//! `cargo run --example substructure_search -- 'OC(=O)c1ccccc1' '[#6]=[#8]' 'c:c'`

use molcap::substructure::{count_matches, parse_query};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (smiles, patterns) = match args.split_first() {
        Some((s, p)) if !p.is_empty() => (s.clone(), p.to_vec()),
        _ => (
            "CC(=O)Oc1ccccc1C(=O)O".to_string(),
            vec![
                "[#6]=[#8]".into(),
                "c1ccccc1".into(),
                "[OX1]".into(),
                "[!#6;!#1]".into(),
                "*~*~*".into(),
            ],
        ),
    };
    let graph = molcap::parse_smiles(&smiles).expect("valid SMILES");
    println!("{smiles}");
    for p in patterns {
        match parse_query(&p) {
            Ok(q) => {
                let m = count_matches(&graph, &q, None);
                println!("  {p:<12} {:>3} matches, first {:?}", m.count, m.first_mapping);
            }
            Err(e) => println!("  {p:<12} rejected: {e}"),
        }
    }
}
