//! Minibatch Adam training, k-fold cross-validation and the S/D grid sweep.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{batches, stratified_folds, Dataset, DatasetError};
use crate::grad::{GradError, Tape, Tensor, PROB_FLOOR};
use crate::metrics::{evaluate, EvalReport, MetricsError};
use crate::model::{forward, EamModel, ModelConfig, ModelError, ModelParams};

/// Mixed into the run seed so dropout masks and batch order use
/// unrelated streams.
const DROPOUT_SALT: u64 = 0x5eed_d0d0_7a11_0b5e;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("model has {model} classes, dataset has {dataset}")]
    ClassCountMismatch { model: usize, dataset: usize },
    #[error("model expects {model}-byte inputs, dataset has {dataset}")]
    InputLenMismatch { model: usize, dataset: usize },
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("adam: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Drives batch order and dropout masks.
    pub seed: u64,
    pub fold_count: usize,
    /// Stop after this many epochs without a held-out loss improvement.
    pub early_stop: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            batch_size: 128,
            epochs: 200,
            seed: 7,
            fold_count: 10,
            early_stop: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.lr));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must be in [0, 1), got {b}"));
            }
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if self.fold_count < 2 {
            return bad("fold count must be at least 2".into());
        }
        if self.early_stop == Some(0) {
            return bad("early-stop patience must be at least 1".into());
        }
        Ok(())
    }
}

/// First and second moments for every parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
}

impl AdamState {
    pub fn new<'t>(params: impl IntoIterator<Item = &'t Tensor>) -> Self {
        let m: Vec<Tensor> = params.into_iter().map(|t| Tensor::zeros(t.shape())).collect();
        AdamState {
            step: 0,
            v: m.clone(),
            m,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(
    params: &mut [&mut Tensor],
    grads: &[Tensor],
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<(), TrainError> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(TrainError::ShapeMismatch(format!(
            "{} params, {} grads, {} moment tensors",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.shape() != g.shape() || p.shape() != state.m[i].shape() {
            return Err(TrainError::ShapeMismatch(format!(
                "tensor {i}: param {:?}, grad {:?}, moment {:?}",
                p.shape(),
                g.shape(),
                state.m[i].shape()
            )));
        }
    }
    state.step += 1;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powf(state.step as f64);
    let c2 = 1.0 - b2.powf(state.step as f64);
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        for (((w, &g), m), v) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *w -= config.lr * m_hat / (v_hat.sqrt() + config.eps);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    pub mean_loss: f64,
    /// Accuracy of the train-mode predictions made while fitting.
    pub train_accuracy: f64,
    pub held_out_loss: Option<f64>,
    pub held_out_accuracy: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochLog>,
    /// Loss of the very first batch, before any update.
    pub first_batch_loss: f64,
    pub stopped_early: bool,
    /// Epoch whose parameters were kept when early stopping restored them.
    pub best_epoch: Option<usize>,
}

/// Settings stamped into saved model files.
pub fn training_metadata(config: &TrainConfig) -> serde_json::Value {
    serde_json::json!({
        "optimizer": "adam",
        "lr": config.lr,
        "beta1": config.beta1,
        "beta2": config.beta2,
        "eps": config.eps,
        "batch_size": config.batch_size,
        "epochs": config.epochs,
        "seed": config.seed,
        "early_stop": config.early_stop,
    })
}

fn dropout_rng(seed: u64, epoch: usize, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ DROPOUT_SALT);
    rng.set_stream(epoch as u64);
    rng.set_word_pos((batch as u128) << 40);
    rng
}

/// Mean cross-entropy and accuracy in eval mode.
pub fn held_out_loss(model: &EamModel, dataset: &Dataset, indices: &[usize]) -> Result<(f64, f64), TrainError> {
    if indices.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let samples = dataset.samples();
    let mut loss = 0.0;
    let mut correct = 0usize;
    for chunk in indices.chunks(256) {
        let batch: Vec<&[u8]> = chunk.iter().map(|&i| samples[i].bytes.as_slice()).collect();
        for (p, &i) in model.predict_proba_batch(&batch)?.iter().zip(chunk) {
            let y = samples[i].label;
            loss -= if p[y].is_nan() { f64::NAN } else { p[y].max(PROB_FLOOR).ln() };
            correct += usize::from(crate::model::argmax(p) == y);
        }
    }
    let n = indices.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

fn check_compatible(model: &EamModel, dataset: &Dataset) -> Result<(), TrainError> {
    if model.config.classes != dataset.num_classes() {
        return Err(TrainError::ClassCountMismatch {
            model: model.config.classes,
            dataset: dataset.num_classes(),
        });
    }
    if model.config.input_len != dataset.input_len() {
        return Err(TrainError::InputLenMismatch {
            model: model.config.input_len,
            dataset: dataset.input_len(),
        });
    }
    Ok(())
}

/// Fits `model` on `train_indices`.
///
/// When `held_out` is given it is scored after every epoch, and
/// `early_stop` patience (if set) watches its loss and restores the best
/// parameters on stopping.
pub fn train(
    model: &mut EamModel,
    dataset: &Dataset,
    train_indices: &[usize],
    held_out: Option<&[usize]>,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainReport, TrainError> {
    config.validate()?;
    check_compatible(model, dataset)?;
    if train_indices.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    model.training = Some(training_metadata(config));
    let samples = dataset.samples();
    let mut adam = AdamState::new(model.params.tensors());
    let mut logs = Vec::with_capacity(config.epochs);
    let mut first_batch_loss = None;
    let mut best: Option<(f64, usize, ModelParams)> = None;
    let mut stale = 0;
    let mut stopped_early = false;

    for epoch in 0..config.epochs {
        let start = Instant::now();
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (b, batch_idx) in batches(train_indices, config.batch_size, config.seed, epoch as u64)
            .iter()
            .enumerate()
        {
            let batch: Vec<&[u8]> = batch_idx.iter().map(|&i| samples[i].bytes.as_slice()).collect();
            let labels: Vec<usize> = batch_idx.iter().map(|&i| samples[i].label).collect();
            let mut rng = dropout_rng(config.seed, epoch, b);
            let (loss, grads, hits) = {
                let mut tape = Tape::new();
                let pv = model.params.register(&mut tape);
                let probs = forward(&mut tape, &pv, &model.config, &batch, true, &mut rng)?;
                let p = tape.value(probs);
                let hits = labels
                    .iter()
                    .enumerate()
                    .filter(|&(r, &y)| crate::model::argmax(p.row(r)) == y)
                    .count();
                let loss_var = tape.cross_entropy(probs, &labels)?;
                let loss = tape.value(loss_var).item();
                if !loss.is_finite() {
                    return Err(TrainError::NonFiniteLoss {
                        epoch: epoch + 1,
                        batch: b,
                    });
                }
                let mut g = tape.backward(loss_var)?;
                (loss, pv.collect_grads(&mut g, &model.params), hits)
            };
            first_batch_loss.get_or_insert(loss);
            loss_sum += loss * batch.len() as f64;
            correct += hits;
            adam_step(&mut model.params.tensors_mut(), &grads, &mut adam, config)?;
        }
        let n = train_indices.len() as f64;
        let (held_out_loss_v, held_out_acc) = match held_out {
            Some(idx) if !idx.is_empty() => {
                let (l, a) = held_out_loss(model, dataset, idx)?;
                (Some(l), Some(a))
            }
            _ => (None, None),
        };
        let log = EpochLog {
            epoch: epoch + 1,
            mean_loss: loss_sum / n,
            train_accuracy: correct as f64 / n,
            held_out_loss: held_out_loss_v,
            held_out_accuracy: held_out_acc,
            seconds: start.elapsed().as_secs_f64(),
        };
        on_epoch(&log);
        logs.push(log);

        if let (Some(patience), Some(l)) = (config.early_stop, held_out_loss_v) {
            if best.as_ref().map_or(true, |(b, _, _)| l < *b) {
                best = Some((l, epoch + 1, model.params.clone()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= patience {
                    stopped_early = true;
                    break;
                }
            }
        }
    }

    let best_epoch = if stopped_early {
        best.map(|(_, e, p)| {
            model.params = p;
            e
        })
    } else {
        None
    };
    Ok(TrainReport {
        epochs: logs,
        first_batch_loss: first_batch_loss.expect("at least one batch ran"),
        stopped_early,
        best_epoch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single value.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub seconds: f64,
    pub final_loss: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValSummary {
    pub accuracy: MeanStd,
    pub macro_precision: MeanStd,
    pub macro_recall: MeanStd,
    pub macro_f1: MeanStd,
    pub micro_f1: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValReport {
    pub averaging: String,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub folds: Vec<FoldResult>,
    pub summary: CrossValSummary,
}

/// Trains one model per fold on the other folds and scores it on the
/// held-out fold. Folds run in parallel on the current rayon pool.
pub fn cross_validate(
    dataset: &Dataset,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    on_fold: impl Fn(&FoldResult) + Sync,
) -> Result<CrossValReport, TrainError> {
    train_config.validate()?;
    let plan = stratified_folds(dataset, train_config.fold_count, train_config.seed)?;
    let folds = (0..plan.fold_count)
        .into_par_iter()
        .map(|fold| {
            let start = Instant::now();
            let train_idx = plan.train_indices(fold);
            let test_idx = plan.test_indices(fold);
            let mut model = EamModel::new(model_config.clone(), dataset.class_names().to_vec())?;
            let log = train(&mut model, dataset, &train_idx, None, train_config, |_| {})?;
            let report = evaluate(&model, dataset, &test_idx)?;
            let result = FoldResult {
                fold,
                train_size: train_idx.len(),
                test_size: test_idx.len(),
                seconds: start.elapsed().as_secs_f64(),
                final_loss: log.epochs.last().map_or(f64::NAN, |e| e.mean_loss),
                report,
            };
            on_fold(&result);
            Ok(result)
        })
        .collect::<Result<Vec<_>, TrainError>>()?;
    let pick = |f: fn(&EvalReport) -> f64| MeanStd::of(&folds.iter().map(|r| f(&r.report)).collect::<Vec<_>>());
    let summary = CrossValSummary {
        accuracy: pick(|r| r.accuracy),
        macro_precision: pick(|r| r.macro_avg.precision),
        macro_recall: pick(|r| r.macro_avg.recall),
        macro_f1: pick(|r| r.macro_avg.f1),
        micro_f1: pick(|r| r.micro_avg.f1),
    };
    Ok(CrossValReport {
        averaging: "macro and micro; macro is the unweighted class mean".into(),
        model: model_config.clone(),
        train: train_config.clone(),
        folds,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub memory_rows: usize,
    pub embed_dim: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub seconds: f64,
}

/// Grid over memory rows S and embedding width D. Each point trains on
/// all folds but the first of a stratified plan and scores on the first.
pub fn sweep(
    dataset: &Dataset,
    base: &ModelConfig,
    train_config: &TrainConfig,
    memory_rows: &[usize],
    embed_dims: &[usize],
    on_point: impl Fn(&SweepPoint) + Sync,
) -> Result<Vec<SweepPoint>, TrainError> {
    train_config.validate()?;
    let plan = stratified_folds(dataset, train_config.fold_count, train_config.seed)?;
    let (train_idx, test_idx) = (plan.train_indices(0), plan.test_indices(0));
    let grid: Vec<(usize, usize)> = memory_rows
        .iter()
        .flat_map(|&s| embed_dims.iter().map(move |&d| (s, d)))
        .collect();
    grid.into_par_iter()
        .map(|(s, d)| {
            let start = Instant::now();
            let cfg = ModelConfig {
                memory_rows: s,
                embed_dim: d,
                ..base.clone()
            };
            let mut model = EamModel::new(cfg, dataset.class_names().to_vec())?;
            train(&mut model, dataset, &train_idx, None, train_config, |_| {})?;
            let report = evaluate(&model, dataset, &test_idx)?;
            let point = SweepPoint {
                memory_rows: s,
                embed_dim: d,
                accuracy: report.accuracy,
                macro_f1: report.macro_avg.f1,
                seconds: start.elapsed().as_secs_f64(),
            };
            on_point(&point);
            Ok(point)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_generate, HeaderSample, SynthSpec};

    fn tensor(shape: &[usize], data: Vec<f64>) -> Tensor {
        Tensor::new(shape.to_vec(), data).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { lr: 0.0, ..Default::default() },
            TrainConfig { beta2: 1.0, ..Default::default() },
            TrainConfig { batch_size: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut w = tensor(&[2, 2], vec![0.5, -1.0, 2.0, 0.0]);
        let before = w.clone();
        let mut state = AdamState::new([&w]);
        state.m[0] = tensor(&[2, 2], vec![0.1; 4]);
        state.v[0] = tensor(&[2, 2], vec![0.01; 4]);
        state.step = 3;
        let cfg = TrainConfig::default();
        adam_step(&mut [&mut w], &[Tensor::zeros(&[2, 2])], &mut AdamState::new([&before]), &cfg).unwrap();
        assert_eq!(w, before);
        // moments decay toward zero
        let m_before = state.m[0].data()[0];
        adam_step(&mut [&mut w], &[Tensor::zeros(&[2, 2])], &mut state, &cfg).unwrap();
        assert!(state.m[0].data()[0].abs() < m_before);
    }

    #[test]
    fn first_step_moves_each_entry_by_lr() {
        let mut w = tensor(&[1, 4], vec![1.0, 1.0, 1.0, 1.0]);
        let g = tensor(&[1, 4], vec![0.3, -2.0, 1e-3, 0.0]);
        let mut state = AdamState::new([&w]);
        let cfg = TrainConfig::default();
        adam_step(&mut [&mut w], &[g.clone()], &mut state, &cfg).unwrap();
        for (i, (&after, &gi)) in w.data().iter().zip(g.data()).enumerate() {
            // closed form: lr * g / (|g| + eps)
            let expected = 1.0 - cfg.lr * gi / (gi.abs() + cfg.eps);
            assert!((after - expected).abs() < 1e-15, "entry {i}");
        }
        assert!((w.data()[0] - (1.0 - 0.001)).abs() < 1e-10);
        assert_eq!(w.data()[3], 1.0);
    }

    #[test]
    fn adam_shape_mismatch() {
        let mut w = tensor(&[1, 2], vec![0.0; 2]);
        let mut state = AdamState::new([&w]);
        let err = adam_step(&mut [&mut w], &[Tensor::zeros(&[2, 1])], &mut state, &TrainConfig::default());
        assert!(matches!(err, Err(TrainError::ShapeMismatch(_))));
    }

    fn small_model(classes: usize, seed: u64) -> EamModel {
        let cfg = ModelConfig {
            embed_dim: 8,
            memory_rows: 16,
            kernels: 16,
            classes,
            seed,
            ..ModelConfig::default()
        };
        EamModel::new(cfg, (0..classes).map(|c| format!("c{c}")).collect()).unwrap()
    }

    fn quick_config(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 32,
            lr: 0.01,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn separable_loss_falls_and_accuracy_rises() {
        let data = synth_generate(&SynthSpec::separable_two_class(), 150, 1).unwrap();
        let idx: Vec<usize> = (0..data.len()).collect();
        let mut model = small_model(2, 1);
        let mut seen = 0;
        let report = train(&mut model, &data, &idx, Some(&idx), &quick_config(6), |_| seen += 1).unwrap();
        assert_eq!(seen, 6);
        let losses: Vec<f64> = report.epochs.iter().map(|e| e.mean_loss).collect();
        let rises = losses.windows(2).filter(|w| w[1] >= w[0]).count();
        assert!(rises <= 1, "{losses:?}");
        assert!((report.first_batch_loss / 2f64.ln() - 1.0).abs() < 0.2);
        assert!(report.epochs.last().unwrap().held_out_accuracy.unwrap() >= 0.99);
    }

    #[test]
    fn training_is_deterministic() {
        let data = synth_generate(&SynthSpec::separable_two_class(), 40, 2).unwrap();
        let idx: Vec<usize> = (0..data.len()).collect();
        let run = || {
            let mut m = small_model(2, 5);
            train(&mut m, &data, &idx, None, &quick_config(2), |_| {}).unwrap();
            m.to_json().unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn nan_parameters_abort_with_batch_index() {
        let data = synth_generate(&SynthSpec::separable_two_class(), 10, 3).unwrap();
        let idx: Vec<usize> = (0..data.len()).collect();
        let mut m = small_model(2, 1);
        m.params.byte_embedding.data_mut().iter_mut().for_each(|v| *v = f64::NAN);
        let err = train(&mut m, &data, &idx, None, &quick_config(1), |_| {}).unwrap_err();
        assert!(matches!(err, TrainError::NonFiniteLoss { epoch: 1, batch: 0 }));
    }

    #[test]
    fn mismatched_classes_rejected() {
        let data = synth_generate(&SynthSpec::separable_two_class(), 10, 3).unwrap();
        let mut m = small_model(3, 1);
        let err = train(&mut m, &data, &[0, 1], None, &quick_config(1), |_| {}).unwrap_err();
        assert!(matches!(err, TrainError::ClassCountMismatch { .. }));
    }

    #[test]
    fn early_stopping_restores_best() {
        let data = synth_generate(&SynthSpec::separable_two_class(), 30, 4).unwrap();
        let idx: Vec<usize> = (0..data.len()).collect();
        let mut m = small_model(2, 1);
        let cfg = TrainConfig {
            lr: 0.5,
            early_stop: Some(1),
            ..quick_config(30)
        };
        let report = train(&mut m, &data, &idx, Some(&idx), &cfg, |_| {}).unwrap();
        if report.stopped_early {
            let best = report.best_epoch.unwrap();
            let (l, _) = held_out_loss(&m, &data, &idx).unwrap();
            assert_eq!(l, report.epochs[best - 1].held_out_loss.unwrap());
        }
    }

    #[test]
    fn crossval_on_byte_three_rule() {
        // label is a deterministic function of byte 3
        let samples: Vec<HeaderSample> = (0..100u8)
            .map(|i| {
                let label = usize::from(i % 2);
                let mut b = vec![69, 0, 0, if label == 0 { 10 } else { 200 }, i, 0, 64, 0, 64, 6, 0, 0];
                b[10] = i.wrapping_mul(7);
                HeaderSample::new(b, label)
            })
            .collect();
        let data = Dataset::from_samples(vec!["a".into(), "b".into()], 12, samples).unwrap();
        let report = cross_validate(&data, &small_model(2, 9).config, &quick_config(8), |_| {}).unwrap();
        assert_eq!(report.folds.len(), 10);
        for f in &report.folds {
            assert_eq!(f.test_size, 10);
            assert_eq!(f.report.accuracy, 1.0, "fold {}", f.fold);
        }
        let accs: Vec<f64> = report.folds.iter().map(|f| f.report.accuracy).collect();
        assert_eq!(report.summary.accuracy.mean, accs.iter().sum::<f64>() / accs.len() as f64);
    }

    #[test]
    fn mean_std_values() {
        let m = MeanStd::of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.std - 1.0).abs() < 1e-15);
        assert_eq!(MeanStd::of(&[4.0]).std, 0.0);
    }
}
