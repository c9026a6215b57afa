//! Lay out a molecule in 2D, rasterize it and write a PGM.
//!
//! `cargo run --example render_image -- 'c1ccccc1C(=O)O' out.pgm`

use std::fs::File;
use std::io::BufWriter;

use molcap::imaging::{layout_2d, render, DEFAULT_SIDE};

fn main() {
    let mut args = std::env::args().skip(1);
    let smiles = args.next().unwrap_or_else(|| "c1ccccc1C(=O)O".to_string());
    let graph = molcap::parse_smiles(&smiles).expect("valid SMILES");
    let layout = layout_2d(&graph).expect("layout");
    println!(
        "bond deviation {:.3}, min separation {:.3}, box {:?}",
        layout.max_bond_deviation(&graph),
        layout.min_separation(),
        layout.bounding_box()
    );
    let image = render(&graph, DEFAULT_SIDE).expect("fits");
    println!("{} nonzero pixels", image.nonzero_count());
    for row in (0..image.side()).step_by(2) {
        let line: String = (0..image.side())
            .map(|c| match image.get(row, c) {
                0.0 => ' ',
                v if v < 0.15 => '.',
                _ => '#',
            })
            .collect();
        if line.trim().is_empty() {
            continue;
        }
        println!("{}", line.trim_end());
    }
    if let Some(path) = args.next() {
        image
            .write_pgm(BufWriter::new(File::create(&path).expect("create")))
            .expect("write");
        println!("wrote {path}");
    }
}
