//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line before asserting. The tests take a
//! shared lock so their wall-clock budgets are not inflated by each other.

mod common;

use std::collections::BTreeSet;
use std::panic;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use common::*;
use molcap::dataset::{
    featurize_dataset, holdout_split, load_csv, stratified_kfold, synthetic_labels, synthetic_oxygen_corpus,
    training_indices, upsample_minority, FeaturizeConfig,
};
use molcap::fingerprint::{initial_invariants, morgan_fingerprint};
use molcap::imaging::{atom_intensity, layout_2d, rasterize, render, ImagingError};
use molcap::maccs::{default_keys, default_keys_text, evaluate_keys, parse_key_definitions, KEY_COUNT};
use molcap::metrics::{auc_roc, roc_points, trapezoid_area};
use molcap::nn::{train, Model, ModelConfig, TrainConfig};
use molcap::smiles::BondOrder;
use molcap::substructure::{count_matches, parse_query, AtomPrimitive, BondPrimitive, QueryPattern};
use molcap::{parse_smiles, MolecularGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u32, ok: bool, detail: &str) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

/// (SMILES, heavy atoms, bonds, rings)
const STRUCTURE_CASES: &[(&str, usize, usize, usize)] = &[
    ("C", 1, 0, 0),
    ("CC", 2, 1, 0),
    ("CCO", 3, 2, 0),
    ("CC(C)C", 4, 3, 0),
    ("CC(C)(C)C", 5, 4, 0),
    ("C(C)(C)(C)C", 5, 4, 0),
    ("CC(=O)O", 4, 3, 0),
    ("C1CC1", 3, 3, 1),
    ("C1CCCCC1", 6, 6, 1),
    ("c1ccccc1", 6, 6, 1),
    ("C1=CC=CC=C1", 6, 6, 1),
    ("c1ccc2ccccc2c1", 10, 11, 2),
    ("C12CC1C2", 4, 5, 2),
    ("C1CC2CCC1C2", 7, 8, 2),
    ("C%10CC%10", 3, 3, 1),
    ("C%12CCCC%12", 5, 5, 1),
    ("C1CC2(CC1)CC2", 7, 8, 2),
    ("O=C=O", 3, 2, 0),
    ("C#N", 2, 1, 0),
    ("[Na+].[Cl-]", 2, 0, 0),
    ("CC.CC", 4, 2, 0),
    ("c1ccncc1", 6, 6, 1),
    ("c1cc[nH]c1", 5, 5, 1),
    ("c1ccoc1", 5, 5, 1),
    ("C(C(C(C)))C", 5, 4, 0),
    ("CC(C)(C)C(=O)OCC", 9, 8, 0),
    ("N[C@@H](C)C(=O)O", 6, 5, 0),
    ("F/C=C/F", 4, 3, 0),
    ("c1ccc(cc1)-c2ccccc2", 12, 13, 2),
    ("C1CC1C1CC1", 6, 7, 2),
    ("OCC(O)CO", 6, 5, 0),
    ("C1CCC2CCCCC2C1", 10, 11, 2),
    ("c1ccc2c(c1)[nH]c1ccccc12", 13, 15, 3),
    ("[NH4+]", 1, 0, 0),
    ("CCCCCCCCCC", 10, 9, 0),
    ("C1CCCCCCCCCCC1", 12, 12, 1),
];

fn same_structure(a: &MolecularGraph, b: &MolecularGraph) -> bool {
    let atoms = |g: &MolecularGraph| {
        g.atoms()
            .iter()
            .map(|x| (x.element, x.aromatic, x.total_h(), x.formal_charge, x.in_ring))
            .collect::<Vec<_>>()
    };
    let bonds = |g: &MolecularGraph| {
        g.bonds()
            .iter()
            .map(|x| (x.a.min(x.b), x.a.max(x.b), x.order))
            .collect::<BTreeSet<_>>()
    };
    atoms(a) == atoms(b) && bonds(a) == bonds(b)
}

const FUZZ_ALPHABET: &[u8] = b"CNOSPFIBrcnos()[]=#:-+@/\\%0123456789.Hl*";

#[test]
fn criterion_1_parser() {
    let _g = serial();
    let start = Instant::now();
    let benzene = same_structure(
        &parse_smiles("c1ccccc1").unwrap(),
        &parse_smiles("C1=CC=CC=C1").unwrap(),
    );

    let mut corpus_failures = Vec::new();
    for &(s, atoms, bonds, rings) in STRUCTURE_CASES {
        match parse_smiles(s) {
            Ok(g) if (g.heavy_atom_count(), g.bond_count(), g.rings().len()) == (atoms, bonds, rings) => {}
            Ok(g) => corpus_failures.push(format!(
                "{s}: got {:?}",
                (g.heavy_atom_count(), g.bond_count(), g.rings().len())
            )),
            Err(e) => corpus_failures.push(format!("{s}: {e}")),
        }
    }

    let prev = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut crashes = 0;
    let mut accepted = 0;
    for i in 0..100_000 {
        let len = rng.gen_range(0..24);
        let s: String = (0..len)
            .map(|_| {
                if i % 2 == 0 {
                    rng.gen_range(0x20u8..0x7f) as char
                } else {
                    FUZZ_ALPHABET[rng.gen_range(0..FUZZ_ALPHABET.len())] as char
                }
            })
            .collect();
        match panic::catch_unwind(|| parse_smiles(&s).is_ok()) {
            Ok(true) => accepted += 1,
            Ok(false) => {}
            Err(_) => crashes += 1,
        }
    }
    panic::set_hook(prev);

    let elapsed = start.elapsed();
    let ok = benzene && corpus_failures.is_empty() && crashes == 0 && within(elapsed, 10);
    report(
        1,
        ok,
        &format!(
            "benzene forms equal: {benzene}; {} structure cases, {} wrong {:?}; fuzz 100000 strings, {crashes} crashes ({accepted} parsed); {:.2}s (limit 10s)",
            STRUCTURE_CASES.len(),
            corpus_failures.len(),
            corpus_failures,
            elapsed.as_secs_f64()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_2_fingerprints() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut variant = 0;
    for _ in 0..200 {
        let g = parse_smiles(&random_smiles(&mut rng, 5)).unwrap();
        let p = g.permuted(&random_permutation(g.atom_count(), &mut rng));
        if morgan_fingerprint(&g, 2, 2048).unwrap() != morgan_fingerprint(&p, 2, 2048).unwrap() {
            variant += 1;
        }
    }
    let pc = |s: &str| {
        morgan_fingerprint(&parse_smiles(s).unwrap(), 2, 2048)
            .unwrap()
            .popcount()
    };
    let (c, cc, cco) = (pc("C"), pc("CC"), pc("CCO"));

    let mut radius0_ok = true;
    for s in ["CCO", "c1ccccc1O", "CC(=O)N", "C1CC1Cl", "[NH4+]"] {
        let g = parse_smiles(s).unwrap();
        let expected: BTreeSet<usize> = initial_invariants(&g).iter().map(|&h| (h % 2048) as usize).collect();
        let got: BTreeSet<usize> = morgan_fingerprint(&g, 0, 2048).unwrap().ones().collect();
        radius0_ok &= expected == got;
    }
    let elapsed = start.elapsed();
    let ok = variant == 0 && c == 1 && cc <= 2 && (4..=6).contains(&cco) && radius0_ok && within(elapsed, 5);
    report(
        2,
        ok,
        &format!(
            "permutation-variant fingerprints {variant}/200; popcount C={c} CC={cc} CCO={cco}; radius-0 folding {radius0_ok}; {:.2}s (limit 5s)",
            elapsed.as_secs_f64()
        ),
    );
    assert!(ok);
}

fn oracle_atom_ok(q: &molcap::substructure::QueryAtom, g: &MolecularGraph, i: usize) -> bool {
    let a = g.atom(i);
    q.clauses.iter().all(|clause| {
        clause.iter().any(|t| {
            let v = match t.primitive {
                AtomPrimitive::Any => true,
                AtomPrimitive::Element {
                    atomic_number,
                    aromatic,
                } => a.element == atomic_number && aromatic.is_none_or(|ar| ar == a.aromatic),
                AtomPrimitive::Aliphatic => !a.aromatic,
                AtomPrimitive::Aromatic => a.aromatic,
                AtomPrimitive::InRing => a.in_ring,
                AtomPrimitive::TotalH(n) => a.explicit_h + a.implicit_h == n,
                AtomPrimitive::HeavyDegree(n) => {
                    g.bonds()
                        .iter()
                        .filter(|b| (b.a == i && g.atom(b.b).element != 1) || (b.b == i && g.atom(b.a).element != 1))
                        .count()
                        == n as usize
                }
                AtomPrimitive::Charge(c) => a.formal_charge == c,
            };
            v != t.negated
        })
    })
}

fn oracle_bond_ok(q: &molcap::substructure::QueryBond, g: &MolecularGraph, x: usize, y: usize) -> bool {
    let Some(bond) = g
        .bonds()
        .iter()
        .find(|b| (b.a == x && b.b == y) || (b.a == y && b.b == x))
    else {
        return false;
    };
    q.clauses.iter().all(|clause| {
        clause.iter().any(|t| {
            let v = match t.primitive {
                BondPrimitive::Single => bond.order == BondOrder::Single,
                BondPrimitive::Double => bond.order == BondOrder::Double,
                BondPrimitive::Triple => bond.order == BondOrder::Triple,
                BondPrimitive::Aromatic => bond.order == BondOrder::Aromatic,
                BondPrimitive::Any => true,
                BondPrimitive::Ring => bond.in_ring,
            };
            v != t.negated
        })
    })
}

/// Distinct atom sets over all injective assignments, by exhaustive search.
fn brute_force_count(g: &MolecularGraph, q: &QueryPattern) -> usize {
    fn extend(g: &MolecularGraph, q: &QueryPattern, map: &mut Vec<usize>, found: &mut BTreeSet<Vec<usize>>) {
        if map.len() == q.atoms().len() {
            let ok = q.bonds().iter().all(|b| oracle_bond_ok(b, g, map[b.a], map[b.b]));
            if ok {
                let mut set = map.clone();
                set.sort_unstable();
                found.insert(set);
            }
            return;
        }
        for i in 0..g.atom_count() {
            if !map.contains(&i) && oracle_atom_ok(&q.atoms()[map.len()], g, i) {
                map.push(i);
                extend(g, q, map, found);
                map.pop();
            }
        }
    }
    let mut found = BTreeSet::new();
    extend(g, q, &mut Vec::new(), &mut found);
    found.len()
}

const QUERY_ATOMS: &[&str] = &[
    "C", "c", "N", "n", "O", "*", "[#6]", "[#7]", "[#8]", "[!#6]", "[R]", "[!R]", "[c,n]", "[C;H2]", "[CH3]", "[O;H1]",
    "[D3]", "[#6;R]", "[a]", "[A]", "[N,O]", "[+]", "[-]", "[Cl]", "[S]",
];
const QUERY_BONDS: &[&str] = &["", "-", "=", ":", "~", "@", "#", "!-", "-,="];

fn random_query(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=4);
    let atom = |rng: &mut ChaCha8Rng| QUERY_ATOMS[rng.gen_range(0..QUERY_ATOMS.len())].to_string();
    let bond = |rng: &mut ChaCha8Rng| QUERY_BONDS[rng.gen_range(0..QUERY_BONDS.len())].to_string();
    let ring = n >= 3 && rng.gen_bool(0.3);
    let mut s = atom(rng);
    if ring {
        s.push('1');
    }
    if n == 4 && rng.gen_bool(0.4) {
        s += &format!(
            "{}{}({}{}){}{}",
            bond(rng),
            atom(rng),
            bond(rng),
            atom(rng),
            bond(rng),
            atom(rng)
        );
    } else {
        for _ in 1..n {
            s += &bond(rng);
            s += &atom(rng);
        }
    }
    if ring {
        s += &bond(rng);
        s.push('1');
    }
    s
}

#[test]
fn criterion_3_substructure_oracle() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pairs = 0;
    let mut disagreements = Vec::new();
    while pairs < 500 {
        let smiles = random_smiles(&mut rng, 3);
        let g = parse_smiles(&smiles).unwrap();
        if g.atom_count() > 10 {
            continue;
        }
        let pattern = random_query(&mut rng);
        let q = parse_query(&pattern).unwrap_or_else(|e| panic!("{pattern}: {e}"));
        let fast = count_matches(&g, &q, None).count;
        let slow = brute_force_count(&g, &q);
        if fast != slow {
            disagreements.push(format!("{smiles} / {pattern}: {fast} vs {slow}"));
        }
        pairs += 1;
    }
    let elapsed = start.elapsed();
    let ok = disagreements.is_empty() && within(elapsed, 30);
    report(
        3,
        ok,
        &format!(
            "{pairs} random pairs, {} disagreements {:?}; {:.2}s (limit 30s)",
            disagreements.len(),
            disagreements.iter().take(5).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_maccs() {
    let _g = serial();
    let parsed = parse_key_definitions(default_keys_text());
    let (count, parse_errors) = match &parsed {
        Ok(k) => (k.len(), 0),
        Err(_) => (0, 1),
    };
    let keys = default_keys();
    let mut kekule_mismatch = Vec::new();
    let mut perm_mismatch = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut corpus = 0;
    for &(aromatic, kekule) in KEKULE_PAIRS {
        let ga = parse_smiles(aromatic).unwrap();
        let gk = parse_smiles(kekule).unwrap();
        if evaluate_keys(&ga, keys) != evaluate_keys(&gk, keys) {
            kekule_mismatch.push(aromatic);
        }
        for g in [ga, gk] {
            corpus += 1;
            let p = g.permuted(&random_permutation(g.atom_count(), &mut rng));
            if evaluate_keys(&g, keys) != evaluate_keys(&p, keys) {
                perm_mismatch += 1;
            }
        }
    }
    let ok = count == KEY_COUNT && parse_errors == 0 && kekule_mismatch.is_empty() && perm_mismatch == 0;
    report(
        4,
        ok,
        &format!(
            "{count} keys, {parse_errors} parse errors; {corpus}-molecule corpus: Kekulé/aromatic mismatches {kekule_mismatch:?}, permutation mismatches {perm_mismatch}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_imaging() {
    let _g = serial();
    let benzene = render(&parse_smiles("c1ccccc1").unwrap(), 60).unwrap();
    let carbon = atom_intensity(6);
    let atom_pixels = benzene.pixels().iter().filter(|&&p| p == carbon).count();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut molecules = 0;
    let mut rotation_failures = Vec::new();
    while molecules < 100 {
        let s = random_smiles(&mut rng, 4);
        let g = parse_smiles(&s).unwrap();
        let Ok(layout) = layout_2d(&g) else { continue };
        let Ok(img) = rasterize(&g, &layout, 60) else { continue };
        molecules += 1;
        let n = img.nonzero_count();
        let turned = (1..4).all(|k| img.rotate90(k).nonzero_count() == n);
        let relaid = rasterize(&g, &layout.rotated90(), 60).map(|r| r.nonzero_count());
        if !turned || relaid != Ok(n) {
            rotation_failures.push(s);
        }
    }
    let chain = "C".repeat(100);
    let too_long = render(&parse_smiles(&chain).unwrap(), 60);
    let does_not_fit = matches!(too_long, Err(ImagingError::DoesNotFit { .. }));
    let ok = atom_pixels == 6 && rotation_failures.is_empty() && does_not_fit;
    report(
        5,
        ok,
        &format!(
            "benzene atom-intensity pixels {atom_pixels}; rotation count changes {}/{molecules} {:?}; C100 at side 60: {}",
            rotation_failures.len(),
            rotation_failures.iter().take(3).collect::<Vec<_>>(),
            match &too_long {
                Err(e) => e.to_string(),
                Ok(_) => "rendered".into(),
            }
        ),
    );
    assert!(ok);
}

fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] == 1 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

#[test]
fn criterion_6_metrics() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_rank, mut worst_trap) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=500);
        let levels = rng.gen_range(2..=50);
        let mut labels: Vec<u8> = (0..n).map(|_| rng.gen_bool(0.3) as u8).collect();
        labels[0] = 1;
        labels[1] = 0;
        let scores: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0..levels) as f64 / levels as f64)
            .collect();
        let auc = auc_roc(&scores, &labels).unwrap();
        worst_rank = worst_rank.max((auc - pairwise_auc(&scores, &labels)).abs());
        let curve = roc_points(&scores, &labels).unwrap();
        worst_trap = worst_trap.max((trapezoid_area(&curve.points) - auc).abs());
    }
    let ok = worst_rank <= 1e-12 && worst_trap <= 1e-12;
    report(
        6,
        ok,
        &format!("1000 tied instances: max |rank - pairwise| {worst_rank:.1e}, max |trapezoid - rank| {worst_trap:.1e} (limit 1e-12)"),
    );
    assert!(ok);
}

#[test]
fn criterion_7_gradients() {
    let _g = serial();
    use molcap::nn::{
        Conv2d, ConvSpec, Dense, GlobalAvgPool, Layer, MaxPool2d, Reduction, Relu, Residual, ResidualKind,
    };
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    type Case = (String, Box<dyn Layer<f64>>, Vec<usize>);
    let mut layers: Vec<Case> = vec![
        (
            "conv3x3".into(),
            Box::new(Conv2d::new(ConvSpec::same(2, 3, 3, 3), 6.0, &mut rng)),
            vec![2, 2, 7, 7],
        ),
        (
            "conv1x1".into(),
            Box::new(Conv2d::new(ConvSpec::same(2, 3, 1, 1), 3.0, &mut rng)),
            vec![2, 2, 6, 5],
        ),
        (
            "conv1x7".into(),
            Box::new(Conv2d::new(ConvSpec::same(2, 2, 1, 7), 6.0, &mut rng)),
            vec![2, 2, 8, 8],
        ),
        (
            "conv3x3s2".into(),
            Box::new(Conv2d::new(ConvSpec::down(2, 2), 6.0, &mut rng)),
            vec![2, 2, 7, 8],
        ),
        ("dense".into(), Box::new(Dense::new(6, 3, 3.0, &mut rng)), vec![3, 6]),
        ("relu".into(), Box::new(Relu::new()), vec![2, 3, 4, 4]),
        ("maxpool".into(), Box::new(MaxPool2d::new()), vec![2, 2, 7, 6]),
        ("avgpool".into(), Box::new(GlobalAvgPool::new()), vec![2, 3, 5, 4]),
        (
            "blockA".into(),
            Box::new(Residual::new(ResidualKind::A, 3, 2, &mut rng)),
            vec![2, 3, 8, 8],
        ),
        (
            "blockB".into(),
            Box::new(Residual::new(ResidualKind::B, 3, 2, &mut rng)),
            vec![2, 3, 8, 8],
        ),
        (
            "blockC".into(),
            Box::new(Residual::new(ResidualKind::C, 3, 2, &mut rng)),
            vec![2, 3, 8, 8],
        ),
        (
            "reduction".into(),
            Box::new(Reduction::new(3, 2, &mut rng)),
            vec![2, 3, 9, 9],
        ),
    ];
    let mut worst = 0.0f64;
    let mut summary = Vec::new();
    for (name, layer, shape) in &mut layers {
        let r = check_layer(layer.as_mut(), shape, 70);
        worst = worst.max(r.worst);
        summary.push(format!("{name} {:.1e}", r.worst));
    }
    let config = ModelConfig {
        blocks_per_stage: 1,
        filters: 4,
        image_side: 20,
        ..ModelConfig::default()
    };
    let model = check_model(&config, 71);
    worst = worst.max(model.worst);
    let elapsed = start.elapsed();
    let ok = worst < FD_TOLERANCE && within(elapsed, 60);
    report(
        7,
        ok,
        &format!(
            "64-bit central differences (step {FD_STEP:e}): [{}]; fused model {} parameters ({} near a ReLU/max-pool switch, step shrunk) worst {:.1e}; overall worst {worst:.1e} (limit {FD_TOLERANCE:e}); {:.1}s (limit 60s)",
            summary.join(", "),
            model.checked,
            model.kinks,
            model.worst,
            elapsed.as_secs_f64()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_8_end_to_end_training() {
    let _g = serial();
    let corpus = synthetic_oxygen_corpus(200, 1);
    let feats = featurize_dataset(&corpus, &FeaturizeConfig::default(), default_keys());
    let labels = feats.labels();
    let model_config = |fp: bool, keys: bool, seed: u64| ModelConfig {
        blocks_per_stage: 1,
        filters: 4,
        use_fingerprint: fp,
        use_keys: keys,
        seed,
        ..ModelConfig::default()
    };
    let run = |fp: bool, keys: bool, seed: u64| {
        let (tr, va) = holdout_split(&labels, 0.2, seed).unwrap();
        let mut model = Model::<f32>::new(&model_config(fp, keys, seed)).unwrap();
        let cfg = TrainConfig {
            max_epochs: 30,
            seed,
            ..TrainConfig::default()
        };
        let start = Instant::now();
        let out = train(&mut model, &feats.examples, &tr, &va, &cfg).unwrap();
        (out, start.elapsed())
    };

    let (main, main_time) = run(true, true, 0);
    let first = main.history.iter().find(|r| r.val_auc >= 0.95).map(|r| r.epoch);
    let main_ok = first.is_some() && within(main_time, 300);

    let mut ordered = 0;
    let mut pairs = Vec::new();
    for seed in 0..10 {
        let full = if seed == 0 {
            main.best_val_auc
        } else {
            run(true, true, seed).0.best_val_auc
        };
        let image_only = run(false, false, seed).0.best_val_auc;
        if image_only <= full {
            ordered += 1;
        }
        pairs.push(format!("{full:.3}/{image_only:.3}"));
    }
    let ok = main_ok && ordered >= 8;
    report(
        8,
        ok,
        &format!(
            "{} molecules; fused model best val AUC {:.4}, first epoch >= 0.95: {first:?} (limit 30), {:.1}s (limit 300s); image-only <= fused for {ordered}/10 seeds (need 8) [fused/image-only {}]",
            feats.examples.len(),
            main.best_val_auc,
            main_time.as_secs_f64(),
            pairs.join(" ")
        ),
    );
    assert!(ok);
}

/// Protocol properties at the HIV corpus's class sizes (41,127 molecules,
/// 1,443 actives) using stand-in labels.
#[test]
fn criterion_9_protocol() {
    let _g = serial();
    let labels = synthetic_labels(41_127, 1_443, 9);
    let split = stratified_kfold(&labels, 5, 9).unwrap();
    let positives = |idx: &[usize]| idx.iter().filter(|&&i| labels[i] == 1).count();
    let sizes: Vec<usize> = split.folds.iter().map(Vec::len).collect();
    let fold_pos: Vec<usize> = split.folds.iter().map(|f| positives(f)).collect();
    let mut all: Vec<usize> = split.folds.concat();
    all.sort_unstable();
    let partition = all == (0..labels.len()).collect::<Vec<_>>();
    let sizes_ok = sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1;
    let strat_ok = fold_pos.iter().max().unwrap() - fold_pos.iter().min().unwrap() <= 1;

    let mut balance_ok = true;
    for (k, fold) in split.folds.iter().enumerate() {
        let train = training_indices(&split, k);
        let up = upsample_minority(&train, &labels, 9 + k as u64).unwrap();
        let held: BTreeSet<usize> = fold.iter().copied().collect();
        balance_ok &= positives(&up) * 2 == up.len();
        balance_ok &= up.iter().all(|i| !held.contains(i));
    }
    let ok = partition && sizes_ok && strat_ok && balance_ok;
    report(
        9,
        ok,
        &format!(
            "at HIV class sizes (41127/1443, stand-in labels): partition {partition}, fold sizes {sizes:?}, actives per fold {fold_pos:?}, upsampled training folds balanced and disjoint from held-out fold: {balance_ok}; surviving-actives count on the real corpus is checked by the ignored test criterion_9_hiv_corpus (set MOLCAP_HIV_CSV)"
        ),
    );
    assert!(ok);
}

/// Needs the MoleculeNet HIV CSV (columns `smiles`, `HIV_active`) at
/// `$MOLCAP_HIV_CSV`.
#[test]
#[ignore]
fn criterion_9_hiv_corpus() {
    let _g = serial();
    let path = std::env::var("MOLCAP_HIV_CSV").expect("set MOLCAP_HIV_CSV to the HIV corpus CSV");
    let corpus = load_csv(std::path::Path::new(&path)).unwrap();
    let feats = featurize_dataset(&corpus.molecules, &FeaturizeConfig::default(), default_keys());
    let labels = feats.labels();
    let actives = labels.iter().filter(|&&l| l == 1).count();
    let split = stratified_kfold(&labels, 5, 7).unwrap();
    let fold_pos: Vec<usize> = split
        .folds
        .iter()
        .map(|f| f.iter().filter(|&&i| labels[i] == 1).count())
        .collect();
    let strat_ok = fold_pos.iter().max().unwrap() - fold_pos.iter().min().unwrap() <= 1;
    let ok = (1_100..=1_400).contains(&actives) && strat_ok;
    report(
        9,
        ok,
        &format!(
            "HIV corpus: {} rows, {} featurized, {actives} surviving actives (band 1100..=1400), exclusions {:?}, actives per fold {fold_pos:?}",
            corpus.molecules.len(),
            feats.examples.len(),
            feats.report.counts_by_reason()
        ),
    );
    assert!(ok);
}
