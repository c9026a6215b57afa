//! Evaluate the 167 structural keys. Set MOLCAP_KEYS to use another key file.

use molcap::maccs::{evaluate_keys, keys_from_env};

fn main() {
    let keys = keys_from_env().expect("key definitions");
    let inputs: Vec<String> = std::env::args().skip(1).collect();
    let inputs = if inputs.is_empty() {
        vec!["c1ccccc1O".to_string(), "CC(=O)N".to_string()]
    } else {
        inputs
    };
    for s in inputs {
        let graph = molcap::parse_smiles(&s).expect("valid SMILES");
        let v = evaluate_keys(&graph, &keys);
        println!("{s}: {} keys on", v.popcount());
        for def in keys.iter().filter(|d| v.get(d.index)) {
            println!("  {:>3} {}", def.index, def.description);
        }
        println!("  packed {:02x?}", v.to_packed());
    }
}
