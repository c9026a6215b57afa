use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{Batch, Model};
use super::optim::{Adam, Plateau};
use super::tensor::Scalar;
use super::NnError;
use crate::dataset::{augment_image, upsample_minority, CaptionedExample};
use crate::metrics::auc_roc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub lr_factor: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Random rotation and shift of every training image.
    pub augment: bool,
    /// Balance the classes of the training indices by resampling.
    pub upsample: bool,
    /// Return the best-scoring epoch's parameters instead of the last.
    pub restore_best: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            batch_size: 32,
            patience: 5,
            lr_factor: 0.5,
            max_epochs: 30,
            seed: 0,
            augment: true,
            upsample: true,
            restore_best: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: &str| Err(NnError::ConfigError(m.to_string()));
        if !(self.lr_factor > 0.0 && self.lr_factor < 1.0) {
            return bad("lr_factor must lie strictly between 0 and 1");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        Ok(())
    }
}

/// One row of the training history. Row 0 describes the untrained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub val_auc: f64,
    pub lr: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_auc: f64,
}

/// A training run that stopped early; `history` holds the completed epochs.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("training stopped after {} epochs: {error}", history.len().saturating_sub(1))]
pub struct TrainFailure {
    pub error: NnError,
    pub history: Vec<EpochRecord>,
}

fn batch_of<T: Scalar>(data: &[CaptionedExample], idx: &[usize]) -> Result<Batch<T>, NnError> {
    Batch::from_parts(idx.iter().map(|&i| {
        let e = &data[i];
        (&e.image, &e.fingerprint, &e.keys)
    }))
}

/// Probabilities for `indices`, computed in chunks of `batch_size`.
pub fn predict_examples<T: Scalar>(
    model: &mut Model<T>,
    data: &[CaptionedExample],
    indices: &[usize],
    batch_size: usize,
) -> Result<Vec<f64>, NnError> {
    let mut out = Vec::with_capacity(indices.len());
    for chunk in indices.chunks(batch_size.max(1)) {
        out.extend(model.predict(&batch_of(data, chunk)?)?);
    }
    Ok(out)
}

pub fn evaluate_auc<T: Scalar>(
    model: &mut Model<T>,
    data: &[CaptionedExample],
    indices: &[usize],
    batch_size: usize,
) -> Result<f64, NnError> {
    let scores = predict_examples(model, data, indices, batch_size)?;
    let labels: Vec<u8> = indices.iter().map(|&i| data[i].label).collect();
    auc_roc(&scores, &labels).map_err(|e| NnError::ConfigError(format!("validation AUC: {e}")))
}

/// Mean loss over `idx` without augmentation or parameter updates.
pub fn mean_loss<T: Scalar>(
    model: &mut Model<T>,
    data: &[CaptionedExample],
    idx: &[usize],
    bs: usize,
) -> Result<f64, NnError> {
    let mut total = 0.0;
    for chunk in idx.chunks(bs) {
        let labels: Vec<u8> = chunk.iter().map(|&i| data[i].label).collect();
        total += model.loss(&batch_of(data, chunk)?, &labels)? * chunk.len() as f64;
    }
    Ok(total / idx.len() as f64)
}

/// Trains `model` on `train_idx`, scoring `val_idx` by ROC AUC after every
/// epoch. With `restore_best`, the parameters of the best-scoring epoch
/// (the untrained state counts as epoch 0) are restored before returning.
pub fn train<T: Scalar>(
    model: &mut Model<T>,
    data: &[CaptionedExample],
    train_idx: &[usize],
    val_idx: &[usize],
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainFailure> {
    let mut history = Vec::new();
    let fail = |error: NnError, history: &Vec<EpochRecord>| TrainFailure {
        error,
        history: history.clone(),
    };
    config.validate().map_err(|e| fail(e, &history))?;
    if train_idx.is_empty() || val_idx.is_empty() {
        return Err(fail(
            NnError::ConfigError("empty training or validation set".into()),
            &history,
        ));
    }
    let bs = config.batch_size;

    let start = Instant::now();
    let loss0 = mean_loss(model, data, train_idx, bs).map_err(|e| fail(e, &history))?;
    let auc0 = evaluate_auc(model, data, val_idx, bs).map_err(|e| fail(e, &history))?;
    history.push(EpochRecord {
        epoch: 0,
        loss: loss0,
        val_auc: auc0,
        lr: config.learning_rate,
        seconds: start.elapsed().as_secs_f64(),
    });

    let mut plateau = Plateau::new(config.learning_rate, config.lr_factor, config.patience);
    plateau.observe(auc0);
    let mut adam = Adam::<T>::new(config.learning_rate);
    let (mut best_epoch, mut best_auc) = (0, auc0);
    let mut best_params = model.snapshot();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order = if config.upsample {
        let labels: Vec<u8> = data.iter().map(|e| e.label).collect();
        upsample_minority(train_idx, &labels, config.seed)
            .map_err(|e| fail(NnError::ConfigError(format!("upsampling: {e}")), &history))?
    } else {
        train_idx.to_vec()
    };

    for epoch in 1..=config.max_epochs {
        let start = Instant::now();
        let lr = plateau.lr;
        adam.lr = lr;
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(bs) {
            let labels: Vec<u8> = chunk.iter().map(|&i| data[i].label).collect();
            let batch = if config.augment {
                let images: Vec<_> = chunk.iter().map(|&i| augment_image(&data[i].image, &mut rng)).collect();
                Batch::from_parts(
                    chunk
                        .iter()
                        .zip(&images)
                        .map(|(&i, img)| (img, &data[i].fingerprint, &data[i].keys)),
                )
            } else {
                batch_of(data, chunk)
            }
            .map_err(|e| fail(e, &history))?;
            model.zero_grad();
            let loss = model
                .loss_and_backward(&batch, &labels)
                .map_err(|e| fail(e, &history))?;
            total += loss * chunk.len() as f64;
            adam.step(|f| model.visit_params(f));
        }
        let val_auc = evaluate_auc(model, data, val_idx, bs).map_err(|e| fail(e, &history))?;
        history.push(EpochRecord {
            epoch,
            loss: total / order.len() as f64,
            val_auc,
            lr,
            seconds: start.elapsed().as_secs_f64(),
        });
        if !val_auc.is_finite() {
            return Err(fail(NnError::NonFiniteLoss, &history));
        }
        if val_auc > best_auc {
            best_auc = val_auc;
            best_epoch = epoch;
            best_params = model.snapshot();
        }
        plateau.observe(val_auc);
    }
    if config.restore_best {
        model.restore(&best_params).map_err(|e| fail(e, &history))?;
    }
    Ok(TrainOutcome {
        history,
        best_epoch,
        best_val_auc: best_auc,
    })
}
