#![allow(dead_code)]

use molcap::nn::{Batch, Layer, Model, ModelConfig, ParamVisitor, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-3;
pub const FD_TOLERANCE: f64 = 1e-4;

/// Gradients whose analytic and numeric values are both below this are
/// treated as exact zeros.
const ZERO_FLOOR: f64 = 1e-10;

#[derive(Debug, Default, Clone, Copy)]
pub struct Report {
    pub worst: f64,
    pub checked: usize,
    /// Entries whose `±FD_STEP` interval crosses a ReLU or max-pool switch;
    /// these are differenced with a step shrunk until it does not.
    pub kinks: usize,
}

/// Smallest step tried when shrinking around a switch point.
const MIN_STEP: f64 = 1e-9;

impl Report {
    /// `f(delta)` evaluates the objective at `theta + delta` and returns it
    /// with the switch pattern of that evaluation.
    pub fn compare(&mut self, analytic: f64, mut f: impl FnMut(f64) -> (f64, Vec<u32>)) {
        let (_, base) = f(0.0);
        let mut step = FD_STEP;
        loop {
            let (up, pu) = f(step);
            let (down, pd) = f(-step);
            if (pu == base && pd == base) || step <= MIN_STEP {
                if step < FD_STEP {
                    self.kinks += 1;
                }
                let numeric = (up - down) / (2.0 * step);
                self.worst = self.worst.max(rel_error(analytic, numeric));
                self.checked += 1;
                return;
            }
            step /= 10.0;
        }
    }
}

pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < ZERO_FLOOR {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

pub fn random_tensor(shape: &[usize], lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

pub fn dot(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn nudge_param(visit: &mut dyn FnMut(&mut ParamVisitor<'_, f64>), index: usize, j: usize, delta: f64) {
    let mut k = 0;
    visit(&mut |_, p| {
        if k == index {
            p.value.data_mut()[j] += delta;
        }
        k += 1;
    });
}

/// Checks every parameter and input element of `layer` under the scalar
/// loss `sum(layer(x) * r)`.
pub fn check_layer(layer: &mut dyn Layer<f64>, input_shape: &[usize], seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    layer.visit_params("", &mut |_, p| {
        for v in p.value.data_mut() {
            *v = rng.gen_range(-0.5..0.5);
        }
    });
    let x = random_tensor(input_shape, -1.0, 1.0, &mut rng);
    let y = layer.forward(&x).unwrap();
    let r = random_tensor(y.shape(), -1.0, 1.0, &mut rng);
    layer.visit_params("", &mut |_, p| p.grad.fill(0.0));
    let dx = layer.backward(&r);

    let mut report = Report::default();
    let mut grads: Vec<Vec<f64>> = Vec::new();
    layer.visit_params("", &mut |_, p| grads.push(p.grad.data().to_vec()));
    for (pi, g) in grads.iter().enumerate() {
        for (j, &analytic) in g.iter().enumerate() {
            report.compare(analytic, |delta| {
                nudge_param(&mut |f| layer.visit_params("", f), pi, j, delta);
                let v = dot(&layer.forward(&x).unwrap(), &r);
                let mut pattern = Vec::new();
                layer.switch_pattern(&mut pattern);
                nudge_param(&mut |f| layer.visit_params("", f), pi, j, -delta);
                (v, pattern)
            });
        }
    }
    for j in 0..x.len() {
        report.compare(dx.data()[j], |delta| {
            let mut xp = x.clone();
            xp.data_mut()[j] += delta;
            let v = dot(&layer.forward(&xp).unwrap(), &r);
            let mut pattern = Vec::new();
            layer.switch_pattern(&mut pattern);
            (v, pattern)
        });
    }
    report
}

pub fn random_batch(n: usize, config: &ModelConfig, rng: &mut ChaCha8Rng) -> Batch<f64> {
    let s = config.image_side;
    let bits = |shape: &[usize], rng: &mut ChaCha8Rng| {
        let len = shape.iter().product();
        Tensor::from_vec(shape, (0..len).map(|_| rng.gen_bool(0.2) as u8 as f64).collect()).unwrap()
    };
    Batch {
        images: random_tensor(&[n, 1, s, s], 0.0, 1.0, rng),
        fingerprints: bits(&[n, config.fp_width], rng),
        keys: bits(&[n, config.keys_width], rng),
    }
}

/// Checks every model parameter under mean binary cross-entropy.
pub fn check_model(config: &ModelConfig, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Model::<f64>::new(config).unwrap();
    model.visit_params(&mut |name, p| {
        if name.ends_with("bias") {
            for v in p.value.data_mut() {
                *v = rng.gen_range(-0.1..0.1);
            }
        }
    });
    let batch = random_batch(2, config, &mut rng);
    let labels = [1u8, 0];
    model.zero_grad();
    model.loss_and_backward(&batch, &labels).unwrap();
    let mut grads: Vec<Vec<f64>> = Vec::new();
    model.visit_params(&mut |_, p| grads.push(p.grad.data().to_vec()));
    let mut report = Report::default();
    for (pi, g) in grads.iter().enumerate() {
        for (j, &analytic) in g.iter().enumerate() {
            report.compare(analytic, |delta| {
                nudge_param(&mut |f| model.visit_params(f), pi, j, delta);
                let v = model.loss(&batch, &labels).unwrap();
                let pattern = model.switch_pattern();
                nudge_param(&mut |f| model.visit_params(f), pi, j, -delta);
                (v, pattern)
            });
        }
    }
    report
}

/// Units with an attachment point at their first atom and a continuation
/// point at their last written atom.
const LINKERS: &[&str] = &[
    "C",
    "CC",
    "N",
    "O",
    "S",
    "C(=O)",
    "c1ccc(cc1)",
    "C1CCC(CC1)",
    "c1ccc(nc1)",
    "C(C)(C)",
    "C=C",
    "C(F)",
    "N(C)",
    "C(c1ccccc1)",
    "C(O)",
    "C1CC1",
    "c1cc2ccccc2c(c1)",
    "C(Cl)",
];
const CAPS: &[&str] = &[
    "F",
    "Cl",
    "Br",
    "C#N",
    "O",
    "N",
    "C(=O)O",
    "c1ccccc1",
    "c1ccoc1",
    "[NH3+]",
    "C(=O)[O-]",
    "c1cc[nH]c1",
    "I",
];

/// A random valid SMILES built from 1 to `max_units` linkers plus an
/// optional cap.
pub fn random_smiles(rng: &mut ChaCha8Rng, max_units: usize) -> String {
    let n = rng.gen_range(1..=max_units);
    let mut s: String = (0..n).map(|_| LINKERS[rng.gen_range(0..LINKERS.len())]).collect();
    if rng.gen_bool(0.6) {
        s.push_str(CAPS[rng.gen_range(0..CAPS.len())]);
    }
    s
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Aromatic and Kekulé spellings of the same molecules.
pub const KEKULE_PAIRS: &[(&str, &str)] = &[
    ("c1ccccc1", "C1=CC=CC=C1"),
    ("Cc1ccccc1", "CC1=CC=CC=C1"),
    ("Oc1ccccc1", "OC1=CC=CC=C1"),
    ("Nc1ccccc1", "NC1=CC=CC=C1"),
    ("c1ccncc1", "C1=CC=NC=C1"),
    ("c1ccc2ccccc2c1", "C1=CC=C2C=CC=CC2=C1"),
    ("c1ccoc1", "C1=COC=C1"),
    ("c1ccsc1", "C1=CSC=C1"),
    ("c1cc[nH]c1", "C1=CNC=C1"),
    ("OC(=O)c1ccccc1", "OC(=O)C1=CC=CC=C1"),
    ("c1ccc(cc1)-c1ccccc1", "C1=CC=C(C=C1)C1=CC=CC=C1"),
    ("c1ccc2[nH]ccc2c1", "C1=CC=C2NC=CC2=C1"),
    ("c1ccc2ncccc2c1", "C1=CC=C2N=CC=CC2=C1"),
    ("Clc1ccc(Cl)cc1", "ClC1=CC=C(Cl)C=C1"),
    ("CC(=O)Oc1ccccc1C(=O)O", "CC(=O)OC1=CC=CC=C1C(=O)O"),
    ("c1cnc[nH]1", "C1=CN=CN1"),
    ("c1ccc(cc1)C#N", "C1=CC=C(C=C1)C#N"),
    ("Brc1ccccn1", "BrC1=CC=CC=N1"),
    ("c1ccc2cc3ccccc3cc2c1", "C1=CC=C2C=C3C=CC=CC3=CC2=C1"),
    ("Cc1ccc(O)cc1", "CC1=CC=C(O)C=C1"),
    ("c1cncnc1", "C1=CN=CN=C1"),
    ("O=[N+]([O-])c1ccccc1", "O=[N+]([O-])C1=CC=CC=C1"),
    ("COc1ccccc1", "COC1=CC=CC=C1"),
    ("c1ccc(cc1)S", "C1=CC=C(C=C1)S"),
    ("Fc1ccccc1F", "FC1=CC=CC=C1F"),
];
