use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::blocks::{Reduction, Residual, ResidualKind, LINEAR_GAIN, RELU_GAIN};
use super::layers::{Conv2d, ConvSpec, Dense, GlobalAvgPool, Layer, Param, ParamVisitor, Relu, Sequential};
use super::tensor::{Scalar, Tensor};
use super::NnError;
use crate::fingerprint::Fingerprint;
use crate::imaging::ChemImage;
use crate::maccs::{KeyVector, KEY_COUNT};

/// Smallest image side accepted: the two reductions must leave at least a
/// 2×2 grid.
pub const MIN_IMAGE_SIDE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub blocks_per_stage: usize,
    pub filters: usize,
    pub image_side: usize,
    pub fp_width: usize,
    pub keys_width: usize,
    pub maccs_hidden: usize,
    pub use_fingerprint: bool,
    pub use_keys: bool,
    /// Seeds parameter initialization.
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            blocks_per_stage: 3,
            filters: 16,
            image_side: 60,
            fp_width: 2048,
            keys_width: KEY_COUNT,
            maccs_hidden: 5,
            use_fingerprint: true,
            use_keys: true,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: String| Err(NnError::ConfigError(m));
        if self.blocks_per_stage == 0 {
            return bad("blocks_per_stage must be at least 1".into());
        }
        if self.filters == 0 {
            return bad("filters must be at least 1".into());
        }
        if self.image_side < MIN_IMAGE_SIDE {
            return bad(format!("image side {} below minimum {MIN_IMAGE_SIDE}", self.image_side));
        }
        if self.use_fingerprint && self.fp_width == 0 {
            return bad("fingerprint width must be positive".into());
        }
        if self.use_keys && (self.keys_width == 0 || self.maccs_hidden == 0) {
            return bad("key branch widths must be positive".into());
        }
        Ok(())
    }

    /// Width of the pooled image feature vector.
    pub fn image_features(&self) -> usize {
        5 * self.filters
    }
}

/// One minibatch: images `[B, 1, S, S]`, fingerprints `[B, bits]`, keys
/// `[B, 167]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub images: Tensor<T>,
    pub fingerprints: Tensor<T>,
    pub keys: Tensor<T>,
}

impl<T: Scalar> Batch<T> {
    pub fn from_parts<'a, I>(items: I) -> Result<Self, NnError>
    where
        I: IntoIterator<Item = (&'a ChemImage, &'a Fingerprint, &'a KeyVector)>,
    {
        let mut images = Vec::new();
        let mut fps = Vec::new();
        let mut keys = Vec::new();
        let mut dims: Option<(usize, usize)> = None;
        let mut n = 0;
        for (img, fp, kv) in items {
            let d = (img.side(), fp.nbits());
            match dims {
                None => dims = Some(d),
                Some(prev) if prev != d => {
                    return Err(NnError::ShapeMismatch {
                        expected: vec![prev.0, prev.1],
                        found: vec![d.0, d.1],
                    })
                }
                _ => {}
            }
            images.extend(img.pixels().iter().map(|&p| T::of(p as f64)));
            fps.extend((0..fp.nbits()).map(|i| if fp.get(i) { T::one() } else { T::zero() }));
            keys.extend(kv.bits().iter().map(|&b| if b { T::one() } else { T::zero() }));
            n += 1;
        }
        let (side, bits) = dims.ok_or(NnError::ShapeMismatch {
            expected: vec![1],
            found: vec![0],
        })?;
        Ok(Batch {
            images: Tensor::from_vec(&[n, 1, side, side], images)?,
            fingerprints: Tensor::from_vec(&[n, bits], fps)?,
            keys: Tensor::from_vec(&[n, KEY_COUNT], keys)?,
        })
    }

    pub fn len(&self) -> usize {
        self.images.shape()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy of `labels` under `sigmoid(logits)`, computed
/// without forming the probabilities.
pub fn bce_with_logits(logits: &[f64], labels: &[u8]) -> f64 {
    let sum: f64 = logits
        .iter()
        .zip(labels)
        .map(|(&z, &y)| z.max(0.0) - z * y as f64 + (-z.abs()).exp().ln_1p())
        .sum();
    sum / logits.len().max(1) as f64
}

/// The captioned-image classifier. Produces one logit per example.
pub struct Model<T> {
    config: ModelConfig,
    image: Sequential<T>,
    fp: Option<Dense<T>>,
    keys: Option<Sequential<T>>,
    fusion: Dense<T>,
}

impl<T: Scalar> Model<T> {
    pub fn new(config: &ModelConfig) -> Result<Self, NnError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (n, f) = (config.blocks_per_stage, config.filters);
        let mut image = Sequential::new()
            .push("stem", Conv2d::new(ConvSpec::same(1, f, 3, 3), RELU_GAIN, &mut rng))
            .push("stem_relu", Relu::new());
        let mut channels = f;
        let stages = [(ResidualKind::A, "a"), (ResidualKind::B, "b"), (ResidualKind::C, "c")];
        for (s, (kind, tag)) in stages.iter().enumerate() {
            for i in 0..n {
                image.push_boxed(
                    format!("block_{tag}{i}"),
                    Box::new(Residual::new(*kind, channels, f, &mut rng)),
                );
            }
            if s < 2 {
                let red = Reduction::new(channels, f, &mut rng);
                channels = red.output_channels();
                image.push_boxed(format!("reduction_{tag}"), Box::new(red));
            }
        }
        image.push_boxed("pool", Box::new(GlobalAvgPool::new()));
        debug_assert_eq!(channels, config.image_features());

        let mut fused = channels;
        let fp = config.use_fingerprint.then(|| {
            fused += 1;
            Dense::new(config.fp_width, 1, LINEAR_GAIN, &mut rng)
        });
        let keys = config.use_keys.then(|| {
            fused += 1;
            Sequential::new()
                .push(
                    "hidden",
                    Dense::new(config.keys_width, config.maccs_hidden, RELU_GAIN, &mut rng),
                )
                .push("relu", Relu::new())
                .push("out", Dense::new(config.maccs_hidden, 1, LINEAR_GAIN, &mut rng))
        });
        let fusion = Dense::new(fused, 1, LINEAR_GAIN, &mut rng);
        Ok(Model {
            config: config.clone(),
            image,
            fp,
            keys,
            fusion,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn check(&self, batch: &Batch<T>) -> Result<(), NnError> {
        let b = batch.len();
        let s = self.config.image_side;
        let expect = |t: &Tensor<T>, shape: Vec<usize>| {
            if t.shape() == &shape[..] {
                Ok(())
            } else {
                Err(NnError::ShapeMismatch {
                    expected: shape,
                    found: t.shape().to_vec(),
                })
            }
        };
        expect(&batch.images, vec![b, 1, s, s])?;
        if self.config.use_fingerprint {
            expect(&batch.fingerprints, vec![b, self.config.fp_width])?;
        }
        if self.config.use_keys {
            expect(&batch.keys, vec![b, self.config.keys_width])?;
        }
        Ok(())
    }

    /// Logits `[B, 1]`; activations are cached for [`Model::backward`].
    pub fn forward(&mut self, batch: &Batch<T>) -> Result<Tensor<T>, NnError> {
        self.check(batch)?;
        let features = self.image.forward(&batch.images)?;
        let mut parts = vec![features];
        if let Some(fp) = &mut self.fp {
            parts.push(fp.forward(&batch.fingerprints)?);
        }
        if let Some(keys) = &mut self.keys {
            parts.push(keys.forward(&batch.keys)?);
        }
        let cat = Tensor::concat_axis1(&parts.iter().collect::<Vec<_>>())?;
        self.fusion.forward(&cat)
    }

    /// Accumulates parameter gradients given `d loss / d logits`.
    pub fn backward(&mut self, dlogits: &Tensor<T>) {
        let dcat = self.fusion.backward(dlogits);
        let mut widths = vec![self.config.image_features()];
        widths.extend(self.fp.iter().map(|_| 1));
        widths.extend(self.keys.iter().map(|_| 1));
        let mut parts = dcat.split_axis1(&widths).into_iter();
        self.image.backward(&parts.next().expect("image part"));
        if let Some(fp) = &mut self.fp {
            fp.backward(&parts.next().expect("fp part"));
        }
        if let Some(keys) = &mut self.keys {
            keys.backward(&parts.next().expect("keys part"));
        }
    }

    /// Probabilities in `(0, 1)`, one per example.
    pub fn predict(&mut self, batch: &Batch<T>) -> Result<Vec<f64>, NnError> {
        Ok(self
            .forward(batch)?
            .data()
            .iter()
            .map(|&z| sigmoid(z.as_f64()))
            .collect())
    }

    /// Forward pass, mean BCE loss and backward pass. Gradients accumulate
    /// onto whatever is already stored.
    pub fn loss_and_backward(&mut self, batch: &Batch<T>, labels: &[u8]) -> Result<f64, NnError> {
        if labels.len() != batch.len() {
            return Err(NnError::ShapeMismatch {
                expected: vec![batch.len()],
                found: vec![labels.len()],
            });
        }
        let logits: Vec<f64> = self.forward(batch)?.data().iter().map(|v| v.as_f64()).collect();
        let loss = bce_with_logits(&logits, labels);
        if !loss.is_finite() {
            return Err(NnError::NonFiniteLoss);
        }
        let scale = 1.0 / labels.len() as f64;
        let dz = logits
            .iter()
            .zip(labels)
            .map(|(&z, &y)| T::of((sigmoid(z) - y as f64) * scale))
            .collect();
        self.backward(&Tensor::from_vec(&[labels.len(), 1], dz)?);
        Ok(loss)
    }

    /// Loss only; leaves gradients untouched.
    pub fn loss(&mut self, batch: &Batch<T>, labels: &[u8]) -> Result<f64, NnError> {
        let logits: Vec<f64> = self.forward(batch)?.data().iter().map(|v| v.as_f64()).collect();
        Ok(bce_with_logits(&logits, labels))
    }

    /// Visits parameters in a fixed order with dotted names.
    pub fn visit_params(&mut self, f: &mut ParamVisitor<'_, T>) {
        self.image.visit_params("image", f);
        if let Some(fp) = &mut self.fp {
            fp.visit_params("fp", f);
        }
        if let Some(keys) = &mut self.keys {
            keys.visit_params("keys", f);
        }
        self.fusion.visit_params("fusion", f);
    }

    /// Switch pattern of the last forward pass (see
    /// [`Layer::switch_pattern`]).
    pub fn switch_pattern(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.image.switch_pattern(&mut out);
        if let Some(keys) = &self.keys {
            keys.switch_pattern(&mut out);
        }
        out
    }

    pub fn zero_grad(&mut self) {
        self.visit_params(&mut |_, p| p.grad.fill(T::zero()));
    }

    pub fn param_count(&mut self) -> usize {
        let mut n = 0;
        self.visit_params(&mut |_, p| n += p.value.len());
        n
    }

    /// Copies of every parameter value in visit order.
    pub fn snapshot(&mut self) -> Vec<(String, Tensor<T>)> {
        let mut out = Vec::new();
        self.visit_params(&mut |name, p| out.push((name.to_string(), p.value.clone())));
        out
    }

    /// Restores values produced by [`Model::snapshot`] (names and shapes
    /// must agree).
    pub fn restore(&mut self, values: &[(String, Tensor<T>)]) -> Result<(), NnError> {
        let mut iter = values.iter();
        let mut err = None;
        self.visit_params(&mut |name, p: &mut Param<T>| {
            if err.is_some() {
                return;
            }
            match iter.next() {
                Some((n, v)) if n == name && v.shape() == p.value.shape() => p.value = v.clone(),
                Some((n, v)) => {
                    err = Some(NnError::Checkpoint(format!(
                        "parameter {n} {:?} does not fit {name} {:?}",
                        v.shape(),
                        p.value.shape()
                    )))
                }
                None => err = Some(NnError::Checkpoint(format!("missing parameter {name}"))),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if iter.next().is_some() {
            return Err(NnError::Checkpoint("extra parameters".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small_config() -> ModelConfig {
        ModelConfig {
            blocks_per_stage: 1,
            filters: 4,
            image_side: 20,
            ..ModelConfig::default()
        }
    }

    fn random_batch(n: usize, config: &ModelConfig, seed: u64) -> Batch<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = config.image_side;
        let mut t = |shape: &[usize], binary: bool| {
            let len = shape.iter().product();
            let data = (0..len)
                .map(|_| {
                    if binary {
                        rng.gen_bool(0.1) as u8 as f64
                    } else {
                        rng.gen_range(0.0..1.0)
                    }
                })
                .collect();
            Tensor::from_vec(shape, data).unwrap()
        };
        Batch {
            images: t(&[n, 1, s, s], false),
            fingerprints: t(&[n, config.fp_width], true),
            keys: t(&[n, config.keys_width], true),
        }
    }

    #[test]
    fn output_shape_and_range() {
        let cfg = small_config();
        let mut m = Model::<f64>::new(&cfg).unwrap();
        let batch = random_batch(2, &cfg, 1);
        assert_eq!(m.forward(&batch).unwrap().shape(), &[2, 1]);
        for p in m.predict(&batch).unwrap() {
            assert!(p > 0.0 && p < 1.0);
        }
    }

    #[test]
    fn zero_parameters_give_one_half() {
        let cfg = small_config();
        let mut m = Model::<f64>::new(&cfg).unwrap();
        m.visit_params(&mut |_, p| p.value.fill(0.0));
        assert_eq!(m.predict(&random_batch(3, &cfg, 2)).unwrap(), vec![0.5; 3]);
    }

    #[test]
    fn no_cross_batch_coupling() {
        let cfg = small_config();
        let mut m = Model::<f64>::new(&cfg).unwrap();
        let one = random_batch(1, &cfg, 3);
        let rep = |t: &Tensor<f64>| {
            let mut shape = t.shape().to_vec();
            shape[0] = 32;
            Tensor::from_vec(&shape, t.data().repeat(32)).unwrap()
        };
        let many = Batch {
            images: rep(&one.images),
            fingerprints: rep(&one.fingerprints),
            keys: rep(&one.keys),
        };
        let p1 = m.predict(&one).unwrap()[0];
        for p in m.predict(&many).unwrap() {
            assert_eq!(p, p1);
        }
        assert_eq!(m.predict(&one).unwrap()[0], p1);
    }

    #[test]
    fn fingerprint_branch_is_linear() {
        let cfg = small_config();
        let mut m = Model::<f64>::new(&cfg).unwrap();
        let batch = random_batch(1, &cfg, 4);
        let fp_out = |m: &mut Model<f64>| m.fp.as_mut().unwrap().forward(&batch.fingerprints).unwrap().data()[0];
        let before = fp_out(&mut m);
        for w in m.fp.as_mut().unwrap().weight.value.data_mut() {
            *w *= 2.0;
        }
        assert!((fp_out(&mut m) - 2.0 * before).abs() < 1e-12);
    }

    #[test]
    fn ablation_ignores_disabled_inputs() {
        let cfg = ModelConfig {
            use_fingerprint: false,
            use_keys: false,
            ..small_config()
        };
        let mut m = Model::<f64>::new(&cfg).unwrap();
        assert_eq!(m.fusion.inputs(), cfg.image_features());
        let a = random_batch(2, &cfg, 5);
        let mut b = a.clone();
        b.fingerprints = random_batch(2, &cfg, 6).fingerprints;
        b.keys = Tensor::zeros(&[2, 3]);
        assert_eq!(m.predict(&a).unwrap(), m.predict(&b).unwrap());
    }

    #[test]
    fn final_bias_gradient_closed_form() {
        let cfg = small_config();
        let mut m = Model::<f64>::new(&cfg).unwrap();
        m.visit_params(&mut |_, p| p.value.fill(0.0));
        m.zero_grad();
        let labels = [1, 0, 1, 1];
        m.loss_and_backward(&random_batch(4, &cfg, 7), &labels).unwrap();
        let g = m.fusion.bias.grad.data()[0];
        assert!((g - (0.5 - 0.75)).abs() < 1e-15);
    }

    #[test]
    fn confident_correct_predictions_have_tiny_gradient() {
        let cfg = small_config();
        let mut m = Model::<f64>::new(&cfg).unwrap();
        m.visit_params(&mut |_, p| p.value.fill(0.0));
        m.fusion.bias.value.data_mut()[0] = 40.0;
        m.zero_grad();
        m.loss_and_backward(&random_batch(3, &cfg, 8), &[1, 1, 1]).unwrap();
        let mut norm = 0.0;
        m.visit_params(&mut |_, p| norm += p.grad.data().iter().map(|g| g * g).sum::<f64>());
        assert!(norm.sqrt() < 1e-6);
    }

    #[test]
    fn deterministic_forward() {
        let cfg = small_config();
        let batch = random_batch(2, &cfg, 9);
        let a = Model::<f64>::new(&cfg).unwrap().predict(&batch).unwrap();
        let mut m = Model::<f64>::new(&cfg).unwrap();
        assert_eq!(m.predict(&batch).unwrap(), a);
        assert_eq!(m.predict(&batch).unwrap(), a);
    }

    #[test]
    fn config_errors() {
        for cfg in [
            ModelConfig {
                image_side: 7,
                ..small_config()
            },
            ModelConfig {
                filters: 0,
                ..small_config()
            },
            ModelConfig {
                blocks_per_stage: 0,
                ..small_config()
            },
        ] {
            assert!(matches!(Model::<f64>::new(&cfg), Err(NnError::ConfigError(_))));
        }
        let mut m = Model::<f64>::new(&small_config()).unwrap();
        let wrong = random_batch(
            1,
            &ModelConfig {
                image_side: 24,
                ..small_config()
            },
            1,
        );
        assert!(matches!(m.forward(&wrong), Err(NnError::ShapeMismatch { .. })));
    }

    #[test]
    fn snapshot_restore_round_trip() {
        let cfg = small_config();
        let mut m = Model::<f64>::new(&cfg).unwrap();
        let snap = m.snapshot();
        m.visit_params(&mut |_, p| p.value.fill(1.0));
        m.restore(&snap).unwrap();
        assert_eq!(m.snapshot(), snap);
        assert!(m.restore(&snap[1..]).is_err());
    }
}
