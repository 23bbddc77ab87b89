//! Confusion-matrix metrics and latency benchmarking.
//!
//! Per-class precision, recall and F1 come from one-vs-rest counts. Macro
//! averages are unweighted class means; micro averages pool the counts,
//! which for single-label data all equal accuracy. A metric whose
//! denominator is zero is reported as 0 and flagged degenerate.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::model::{argmax, EamModel, ModelError};
use crate::pcap::{extract_sample, PcapRecord};

const EVAL_CHUNK: usize = 256;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cannot evaluate an empty subset")]
    EmptySubset,
    #[error("model has {model} classes, dataset has {dataset}")]
    ClassCountMismatch { model: usize, dataset: usize },
    #[error("label {label} outside {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("benchmark needs at least one iteration and one input")]
    NothingToTime,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Rows are true classes, columns are predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        assert!(counts.iter().all(|r| r.len() == counts.len()), "confusion matrix must be square");
        ConfusionMatrix { counts }
    }

    pub fn from_pairs(classes: usize, truth: &[usize], predicted: &[usize]) -> Result<Self, MetricsError> {
        let mut m = Self::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            m.record(t, p)?;
        }
        Ok(m)
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<(), MetricsError> {
        let classes = self.classes();
        for label in [truth, predicted] {
            if label >= classes {
                return Err(MetricsError::LabelOutOfRange { label, classes });
            }
        }
        self.counts[truth][predicted] += 1;
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn true_positives(&self, class: usize) -> u64 {
        self.counts[class][class]
    }

    pub fn false_positives(&self, class: usize) -> u64 {
        (0..self.classes()).filter(|&r| r != class).map(|r| self.counts[r][class]).sum()
    }

    pub fn false_negatives(&self, class: usize) -> u64 {
        (0..self.classes()).filter(|&c| c != class).map(|c| self.counts[class][c]).sum()
    }

    pub fn true_negatives(&self, class: usize) -> u64 {
        self.total() - self.true_positives(class) - self.false_positives(class) - self.false_negatives(class)
    }

    pub fn to_csv(&self, class_names: &[String]) -> String {
        let mut out = String::from("true\\predicted");
        for name in class_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (name, row) in class_names.iter().zip(&self.counts) {
            out.push_str(name);
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Ratio with the zero-denominator convention: `(value, degenerate)`.
fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn f1_of(p: f64, r: f64) -> (f64, bool) {
    if p + r == 0.0 {
        (0.0, true)
    } else {
        (2.0 * p * r / (p + r), false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub name: String,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a zero denominator forced a metric to 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averaged {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: u64,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_avg: Averaged,
    pub micro_avg: Averaged,
    pub confusion: ConfusionMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencyStats>,
}

impl EvalReport {
    pub fn from_confusion(confusion: ConfusionMatrix, class_names: &[String]) -> Result<Self, MetricsError> {
        let total = confusion.total();
        if total == 0 {
            return Err(MetricsError::EmptySubset);
        }
        let t = confusion.classes();
        let per_class: Vec<ClassMetrics> = (0..t)
            .map(|c| {
                let tp = confusion.true_positives(c);
                let (precision, dp) = ratio(tp, tp + confusion.false_positives(c));
                let (recall, dr) = ratio(tp, tp + confusion.false_negatives(c));
                let (f1, df) = f1_of(precision, recall);
                ClassMetrics {
                    name: class_names.get(c).cloned().unwrap_or_else(|| format!("class{c}")),
                    support: tp + confusion.false_negatives(c),
                    precision,
                    recall,
                    f1,
                    degenerate: dp || dr || df,
                }
            })
            .collect();
        let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / t as f64;
        let macro_avg = Averaged {
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: mean(|m| m.f1),
        };
        let tp: u64 = confusion.trace();
        let fp: u64 = (0..t).map(|c| confusion.false_positives(c)).sum();
        let fn_: u64 = (0..t).map(|c| confusion.false_negatives(c)).sum();
        let (mp, _) = ratio(tp, tp + fp);
        let (mr, _) = ratio(tp, tp + fn_);
        let micro_avg = Averaged {
            precision: mp,
            recall: mr,
            f1: f1_of(mp, mr).0,
        };
        Ok(EvalReport {
            samples: total,
            accuracy: confusion.trace() as f64 / total as f64,
            per_class,
            macro_avg,
            micro_avg,
            confusion,
            latency: None,
        })
    }
}

/// Runs the model over `indices` of `dataset` in eval mode.
pub fn evaluate(model: &EamModel, dataset: &Dataset, indices: &[usize]) -> Result<EvalReport, MetricsError> {
    if indices.is_empty() {
        return Err(MetricsError::EmptySubset);
    }
    if model.config.classes != dataset.num_classes() {
        return Err(MetricsError::ClassCountMismatch {
            model: model.config.classes,
            dataset: dataset.num_classes(),
        });
    }
    let (truth, predicted) = predict_indices(model, dataset, indices)?;
    let confusion = ConfusionMatrix::from_pairs(model.config.classes, &truth, &predicted)?;
    EvalReport::from_confusion(confusion, dataset.class_names())
}

pub(crate) fn predict_indices(
    model: &EamModel,
    dataset: &Dataset,
    indices: &[usize],
) -> Result<(Vec<usize>, Vec<usize>), MetricsError> {
    let samples = dataset.samples();
    let mut truth = Vec::with_capacity(indices.len());
    let mut predicted = Vec::with_capacity(indices.len());
    for chunk in indices.chunks(EVAL_CHUNK) {
        let batch: Vec<&[u8]> = chunk.iter().map(|&i| samples[i].bytes.as_slice()).collect();
        for (probs, &i) in model.predict_proba_batch(&batch)?.iter().zip(chunk) {
            truth.push(samples[i].label);
            predicted.push(argmax(probs));
        }
    }
    Ok((truth, predicted))
}

/// Per-call timings in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub iterations: usize,
    pub mean_us: f64,
    pub p50_us: f64,
    pub p99_us: f64,
}

impl Timing {
    /// Summarizes raw samples; percentiles use the nearest-rank rule.
    pub fn from_samples(mut micros: Vec<f64>) -> Self {
        assert!(!micros.is_empty(), "need at least one timing");
        micros.sort_by(f64::total_cmp);
        let n = micros.len();
        let rank = |q: f64| micros[((q * n as f64).ceil() as usize).clamp(1, n) - 1];
        Timing {
            iterations: n,
            mean_us: micros.iter().sum::<f64>() / n as f64,
            p50_us: rank(0.5),
            p99_us: rank(0.99),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub warmup: usize,
    /// Batch-size-1 forward passes.
    pub forward: Timing,
    /// Frame to sample extraction, when frames were supplied.
    pub preprocess: Option<Timing>,
}

/// Times single-sample forward passes, cycling through `inputs`.
pub fn bench_latency(
    model: &EamModel,
    inputs: &[Vec<u8>],
    iterations: usize,
    warmup: usize,
) -> Result<LatencyStats, MetricsError> {
    if iterations == 0 || inputs.is_empty() {
        return Err(MetricsError::NothingToTime);
    }
    for i in 0..warmup {
        std::hint::black_box(model.predict_proba(&inputs[i % inputs.len()])?);
    }
    let mut micros = Vec::with_capacity(iterations);
    for i in 0..iterations {
        let x = &inputs[i % inputs.len()];
        let start = Instant::now();
        std::hint::black_box(model.predict_proba(x)?);
        micros.push(start.elapsed().as_secs_f64() * 1e6);
    }
    Ok(LatencyStats {
        warmup,
        forward: Timing::from_samples(micros),
        preprocess: None,
    })
}

/// Times the record to sample path on its own.
pub fn bench_preprocess(
    records: &[PcapRecord],
    link_type: u32,
    input_len: usize,
    iterations: usize,
) -> Result<Timing, MetricsError> {
    if iterations == 0 || records.is_empty() {
        return Err(MetricsError::NothingToTime);
    }
    let mut micros = Vec::with_capacity(iterations);
    for i in 0..iterations {
        let r = &records[i % records.len()];
        let start = Instant::now();
        let _ = std::hint::black_box(extract_sample(r, link_type, 0, input_len));
        micros.push(start.elapsed().as_secs_f64() * 1e6);
    }
    Ok(Timing::from_samples(micros))
}
