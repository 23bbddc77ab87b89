//! Labeled header samples, the CSV interchange format, synthetic data,
//! stratified folds and minibatch schedules.
//!
//! CSV layout:
//!
//! ```text
//! # classes: Chat,Email
//! byte1,byte2,...,byte12,label
//! 69,0,4,143,108,209,64,0,128,6,3,94,0
//! ```
//!
//! Bytes are stored as-is; scaling to `[0, 1]` happens where values are
//! consumed, never in storage.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_INPUT_LEN: usize = 12;
pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    TooFewSamples {
        class: usize,
        count: usize,
        folds: usize,
    },
    #[error("sample length {got} does not match dataset input length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub file: PathBuf,
    pub record: usize,
}

/// One input vector with its class index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderSample {
    pub bytes: Vec<u8>,
    pub label: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceMeta>,
}

impl HeaderSample {
    pub fn new(bytes: Vec<u8>, label: usize) -> Self {
        HeaderSample {
            bytes,
            label,
            source: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<HeaderSample>,
    class_names: Vec<String>,
    input_len: usize,
}

impl Dataset {
    pub fn new(class_names: Vec<String>, input_len: usize) -> Self {
        Dataset {
            samples: Vec::new(),
            class_names,
            input_len,
        }
    }

    pub fn from_samples(
        class_names: Vec<String>,
        input_len: usize,
        samples: Vec<HeaderSample>,
    ) -> Result<Self, DatasetError> {
        let mut d = Self::new(class_names, input_len);
        for s in samples {
            d.push(s)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, sample: HeaderSample) -> Result<(), DatasetError> {
        if sample.bytes.len() != self.input_len {
            return Err(DatasetError::LengthMismatch {
                expected: self.input_len,
                got: sample.bytes.len(),
            });
        }
        if sample.label >= self.class_names.len() {
            return Err(DatasetError::LabelOutOfRange {
                label: sample.label,
                classes: self.class_names.len(),
            });
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn samples(&self) -> &[HeaderSample] {
        &self.samples
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// New dataset holding the samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            class_names: self.class_names.clone(),
            input_len: self.input_len,
        }
    }

    /// Drops later samples whose (bytes, label) pair was already seen.
    pub fn dedup(&mut self) -> usize {
        let before = self.samples.len();
        let mut seen = std::collections::HashSet::new();
        self.samples
            .retain(|s| seen.insert((s.bytes.clone(), s.label)));
        before - self.samples.len()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        self.write_csv_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, out: &mut W) -> Result<(), DatasetError> {
        writeln!(out, "# classes: {}", self.class_names.join(","))?;
        let header: Vec<String> = (1..=self.input_len).map(|i| format!("byte{i}")).collect();
        writeln!(out, "{},label", header.join(","))?;
        let mut line = String::new();
        for s in &self.samples {
            line.clear();
            for b in &s.bytes {
                line.push_str(&b.to_string());
                line.push(',');
            }
            line.push_str(&s.label.to_string());
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
        let file = fs::File::open(path)?;
        Self::read_csv_from(BufReader::new(file))
    }

    pub fn read_csv_from<R: BufRead>(input: R) -> Result<Dataset, DatasetError> {
        let mut class_names: Option<Vec<String>> = None;
        let mut input_len: Option<usize> = None;
        let mut samples = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                if let Some(names) = rest.trim().strip_prefix("classes:") {
                    class_names = Some(
                        names
                            .split(',')
                            .map(|n| n.trim().to_string())
                            .filter(|n| !n.is_empty())
                            .collect(),
                    );
                }
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let Some(n) = input_len else {
                input_len = Some(parse_header(&fields, lineno)?);
                continue;
            };
            if fields.len() != n + 1 {
                return Err(DatasetError::MalformedRow {
                    line: lineno,
                    reason: format!("expected {} columns, found {}", n + 1, fields.len()),
                });
            }
            let mut bytes = Vec::with_capacity(n);
            for f in &fields[..n] {
                let v: u32 = f.parse().map_err(|_| DatasetError::MalformedRow {
                    line: lineno,
                    reason: format!("not an integer: {f:?}"),
                })?;
                if v > 255 {
                    return Err(DatasetError::MalformedRow {
                        line: lineno,
                        reason: format!("byte value {v} exceeds 255"),
                    });
                }
                bytes.push(v as u8);
            }
            let label: usize = fields[n].parse().map_err(|_| DatasetError::MalformedRow {
                line: lineno,
                reason: format!("label is not an integer: {:?}", fields[n]),
            })?;
            if let Some(names) = &class_names {
                if label >= names.len() {
                    return Err(DatasetError::MalformedRow {
                        line: lineno,
                        reason: format!("label {label} but only {} classes declared", names.len()),
                    });
                }
            }
            samples.push(HeaderSample::new(bytes, label));
        }
        let input_len = input_len.ok_or_else(|| DatasetError::MalformedRow {
            line: 0,
            reason: "missing header row".into(),
        })?;
        let class_names = class_names.unwrap_or_else(|| {
            let t = samples.iter().map(|s| s.label + 1).max().unwrap_or(0);
            (0..t).map(|i| format!("class{i}")).collect()
        });
        Dataset::from_samples(class_names, input_len, samples)
    }
}

fn parse_header(fields: &[&str], line: usize) -> Result<usize, DatasetError> {
    let malformed = |reason: String| DatasetError::MalformedRow { line, reason };
    let Some((last, bytes)) = fields.split_last() else {
        return Err(malformed("empty header".into()));
    };
    if *last != "label" || bytes.is_empty() {
        return Err(malformed("header must be byte1,...,byteN,label".into()));
    }
    for (i, f) in bytes.iter().enumerate() {
        if *f != format!("byte{}", i + 1) {
            return Err(malformed(format!("unexpected header column {f:?}")));
        }
    }
    Ok(bytes.len())
}

/// Categorical distribution over byte values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByteDist {
    pub weights: Vec<f64>,
}

impl ByteDist {
    pub fn constant(v: u8) -> Self {
        let mut weights = vec![0.0; 256];
        weights[v as usize] = 1.0;
        ByteDist { weights }
    }

    /// Uniform over the inclusive range `lo..=hi`.
    pub fn range(lo: u8, hi: u8) -> Self {
        let mut weights = vec![0.0; 256];
        for w in &mut weights[lo as usize..=hi as usize] {
            *w = 1.0;
        }
        ByteDist { weights }
    }

    pub fn uniform() -> Self {
        Self::range(0, 255)
    }

    /// Uniform over an explicit set of values.
    pub fn choice(values: &[u8]) -> Self {
        let mut weights = vec![0.0; 256];
        for &v in values {
            weights[v as usize] = 1.0;
        }
        ByteDist { weights }
    }

    fn validate(&self) -> Result<(), String> {
        if self.weights.len() != 256 {
            return Err(format!("{} weights, need 256", self.weights.len()));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err("negative or non-finite weight".into());
        }
        if self.weights.iter().all(|w| *w == 0.0) {
            return Err("all weights are zero".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    /// One distribution per byte position.
    pub bytes: Vec<ByteDist>,
}

/// Per-class byte distributions for [`synth_generate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub input_len: usize,
    pub classes: Vec<ClassSpec>,
}

const PROTOCOL_BYTE: usize = 9;
const VERSION_IHL: u8 = 69;

impl SynthSpec {
    /// Plausible header bytes shared by every class; callers override the
    /// positions that should carry class signal.
    fn base_header(input_len: usize) -> Vec<ByteDist> {
        let mut bytes: Vec<ByteDist> = (0..input_len).map(|_| ByteDist::uniform()).collect();
        let fixed = [
            (0, ByteDist::constant(VERSION_IHL)),
            (1, ByteDist::choice(&[0, 0, 0, 0, 0, 0, 0, 8, 32, 184])),
            (6, ByteDist::choice(&[0, 64])),
            (7, ByteDist::constant(0)),
            (8, ByteDist::choice(&[32, 64, 128, 255, 34, 76, 116, 52])),
            (9, ByteDist::choice(&[6, 17])),
        ];
        for (pos, dist) in fixed {
            if pos < input_len {
                bytes[pos] = dist;
            }
        }
        bytes
    }

    /// Two classes whose Total Length fields fall in disjoint ranges:
    /// class 0 spans 40..=120 bytes, class 1 spans 1024..=1535.
    pub fn separable_two_class() -> Self {
        let mut a = Self::base_header(12);
        a[2] = ByteDist::constant(0);
        a[3] = ByteDist::range(40, 120);
        let mut b = Self::base_header(12);
        b[2] = ByteDist::range(4, 5);
        b[3] = ByteDist::uniform();
        SynthSpec {
            input_len: 12,
            classes: vec![
                ClassSpec {
                    name: "small".into(),
                    bytes: a,
                },
                ClassSpec {
                    name: "large".into(),
                    bytes: b,
                },
            ],
        }
    }

    /// `classes` service-like classes. Class `c` draws the high Total Length
    /// byte from `{2c, 2c+1}`, so the label is a function of bytes 2-3; the
    /// remaining fields get class-flavoured but overlapping distributions.
    pub fn service_like(classes: usize, input_len: usize) -> Result<Self, DatasetError> {
        if classes < 2 || classes > 128 {
            return Err(DatasetError::InvalidSpec(format!(
                "service_like supports 2..=128 classes, got {classes}"
            )));
        }
        if input_len < 12 {
            return Err(DatasetError::InvalidSpec(format!(
                "input length {input_len} is shorter than the 12 header bytes"
            )));
        }
        let names = ["Chat", "Email", "File Transfer", "P2P", "Streaming", "VoIP"];
        let specs = (0..classes)
            .map(|c| {
                let mut bytes = Self::base_header(input_len);
                let hi = (2 * c) as u8;
                bytes[2] = ByteDist::choice(&[hi, hi + 1]);
                bytes[3] = if c == 0 {
                    ByteDist::range(40, 255)
                } else {
                    ByteDist::uniform()
                };
                // Identification tends to cluster per host in real captures.
                bytes[4] = ByteDist::range((c * 37 % 200) as u8, (c * 37 % 200 + 55) as u8);
                ClassSpec {
                    name: names
                        .get(c)
                        .map_or_else(|| format!("class{c}"), |n| (*n).to_string()),
                    bytes,
                }
            })
            .collect();
        Ok(SynthSpec {
            input_len,
            classes: specs,
        })
    }
}

/// Draws `per_class` samples from every class in order.
///
/// Byte 0 is always 69 (IPv4, 20-byte header) and the protocol byte is
/// restricted to TCP or UDP.
pub fn synth_generate(spec: &SynthSpec, per_class: usize, seed: u64) -> Result<Dataset, DatasetError> {
    if spec.classes.len() < 2 {
        return Err(DatasetError::InvalidSpec("need at least two classes".into()));
    }
    let mut samplers = Vec::with_capacity(spec.classes.len());
    for class in &spec.classes {
        if class.bytes.len() != spec.input_len {
            return Err(DatasetError::InvalidSpec(format!(
                "class {:?} has {} byte distributions, input length is {}",
                class.name,
                class.bytes.len(),
                spec.input_len
            )));
        }
        let mut per_byte = Vec::with_capacity(spec.input_len);
        for (pos, dist) in class.bytes.iter().enumerate() {
            dist.validate()
                .map_err(|e| DatasetError::InvalidSpec(format!("class {:?} byte {pos}: {e}", class.name)))?;
            let weights = match pos {
                0 => ByteDist::constant(VERSION_IHL).weights,
                PROTOCOL_BYTE => protocol_weights(&dist.weights),
                _ => dist.weights.clone(),
            };
            per_byte.push(WeightedIndex::new(&weights).expect("validated weights"));
        }
        samplers.push(per_byte);
    }

    let names = spec.classes.iter().map(|c| c.name.clone()).collect();
    let mut out = Dataset::new(names, spec.input_len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (label, per_byte) in samplers.iter().enumerate() {
        for _ in 0..per_class {
            let bytes = per_byte.iter().map(|d| d.sample(&mut rng) as u8).collect();
            out.samples.push(HeaderSample::new(bytes, label));
        }
    }
    Ok(out)
}

fn protocol_weights(w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 256];
    out[6] = w[6];
    out[17] = w[17];
    if out[6] == 0.0 && out[17] == 0.0 {
        out[6] = 1.0;
    }
    out
}

/// Assignment of every sample to one of `fold_count` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub fold_count: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Stratified fold assignment.
///
/// Each class's indices are shuffled with the seed and dealt round-robin,
/// starting where the previous class stopped so fold sizes stay balanced
/// overall too.
pub fn stratified_folds(dataset: &Dataset, fold_count: usize, seed: u64) -> Result<FoldPlan, DatasetError> {
    if fold_count < 2 {
        return Err(DatasetError::Invalid(format!("fold count must be at least 2, got {fold_count}")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.num_classes()];
    for (i, s) in dataset.samples().iter().enumerate() {
        by_class[s.label].push(i);
    }
    for (class, idx) in by_class.iter().enumerate() {
        if !idx.is_empty() && idx.len() < fold_count {
            return Err(DatasetError::TooFewSamples {
                class,
                count: idx.len(),
                folds: fold_count,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; dataset.len()];
    let mut next = 0;
    for idx in &mut by_class {
        idx.shuffle(&mut rng);
        for &i in idx.iter() {
            assignments[i] = next;
            next = (next + 1) % fold_count;
        }
    }
    Ok(FoldPlan {
        fold_count,
        seed,
        assignments,
    })
}

/// Shuffled minibatches of `indices` for one epoch; the order depends only
/// on `(seed, epoch)`.
pub fn batches(indices: &[usize], batch_size: usize, seed: u64, epoch: u64) -> Vec<Vec<usize>> {
    assert!(batch_size >= 1, "batch size must be positive");
    let mut order = indices.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch);
    order.shuffle(&mut rng);
    order.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(t: usize) -> Vec<String> {
        (0..t).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn reads_table_row() {
        let csv = "# classes: Chat,Email\nbyte1,byte2,byte3,byte4,byte5,byte6,byte7,byte8,byte9,byte10,byte11,byte12,label\n69,0,5,220,90,160,64,0,32,6,101,46,1\n";
        let d = Dataset::read_csv_from(csv.as_bytes()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.samples()[0].bytes, vec![69, 0, 5, 220, 90, 160, 64, 0, 32, 6, 101, 46]);
        assert_eq!(d.class_names()[d.samples()[0].label], "Email");
    }

    #[test]
    fn empty_dataset_round_trip() {
        let d = Dataset::new(names(3), 12);
        let mut buf = Vec::new();
        d.write_csv_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(Dataset::read_csv_from(&buf[..]).unwrap(), d);
    }

    #[test]
    fn malformed_rows() {
        let head = "# classes: a,b\nbyte1,byte2,byte3,byte4,byte5,byte6,byte7,byte8,byte9,byte10,byte11,byte12,label\n";
        let cases = [
            "69,0,5,220,90,160,64,0,32,6,101,1\n",
            "69,0,5,220,90,160,64,0,32,6,101,x,1\n",
            "69,0,5,220,90,160,64,0,32,6,101,256,1\n",
            "69,0,5,220,90,160,64,0,32,6,101,46,2\n",
        ];
        for row in cases {
            let text = format!("{head}{row}");
            assert!(
                matches!(
                    Dataset::read_csv_from(text.as_bytes()),
                    Err(DatasetError::MalformedRow { line: 3, .. })
                ),
                "{row}"
            );
        }
    }

    #[test]
    fn push_checks_length_and_label() {
        let mut d = Dataset::new(names(2), 12);
        assert!(matches!(
            d.push(HeaderSample::new(vec![0; 11], 0)),
            Err(DatasetError::LengthMismatch { .. })
        ));
        assert!(matches!(
            d.push(HeaderSample::new(vec![0; 12], 2)),
            Err(DatasetError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn synth_counts_and_determinism() {
        let spec = SynthSpec::separable_two_class();
        let a = synth_generate(&spec, 1000, 7).unwrap();
        let b = synth_generate(&spec, 1000, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.class_counts(), vec![1000, 1000]);
        assert!(a.samples().iter().all(|s| s.bytes[0] == 69));
        assert!(a.samples().iter().all(|s| s.bytes[9] == 6 || s.bytes[9] == 17));
        assert!(synth_generate(&spec, 0, 1).unwrap().is_empty());
        assert_ne!(a, synth_generate(&spec, 1000, 8).unwrap());
    }

    /// Depth-1 decision stump over the Total Length field (bytes 2-3),
    /// fitted by exhaustive threshold search.
    fn stump_accuracy(d: &Dataset) -> f64 {
        let pts: Vec<(u16, usize)> = d
            .samples()
            .iter()
            .map(|s| (u16::from_be_bytes([s.bytes[2], s.bytes[3]]), s.label))
            .collect();
        let mut best = 0;
        for thr in 0..=u16::MAX {
            for polarity in [0usize, 1] {
                let correct = pts
                    .iter()
                    .filter(|(v, y)| ((*v >= thr) as usize ^ polarity) == *y)
                    .count();
                best = best.max(correct);
            }
        }
        best as f64 / pts.len() as f64
    }

    #[test]
    fn separable_spec_is_separable() {
        let d = synth_generate(&SynthSpec::separable_two_class(), 1000, 3).unwrap();
        assert_eq!(d.len(), 2000);
        assert_eq!(stump_accuracy(&d), 1.0);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = SynthSpec::separable_two_class();
        spec.classes[0].bytes[3].weights[5] = -1.0;
        assert!(matches!(synth_generate(&spec, 1, 0), Err(DatasetError::InvalidSpec(_))));
        let mut spec = SynthSpec::separable_two_class();
        spec.classes[1].bytes[4] = ByteDist { weights: vec![0.0; 256] };
        assert!(matches!(synth_generate(&spec, 1, 0), Err(DatasetError::InvalidSpec(_))));
        let mut spec = SynthSpec::separable_two_class();
        spec.classes.truncate(1);
        assert!(synth_generate(&spec, 1, 0).is_err());
    }

    fn labeled(counts: &[usize]) -> Dataset {
        let mut d = Dataset::new(names(counts.len()), 12);
        for (c, &n) in counts.iter().enumerate() {
            for i in 0..n {
                d.push(HeaderSample::new(vec![(i % 256) as u8; 12], c)).unwrap();
            }
        }
        d
    }

    fn per_fold_class_counts(d: &Dataset, plan: &FoldPlan) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; d.num_classes()]; plan.fold_count];
        for (i, s) in d.samples().iter().enumerate() {
            counts[plan.assignments[i]][s.label] += 1;
        }
        counts
    }

    #[test]
    fn folds_balanced_even_split() {
        let d = labeled(&[50, 50]);
        let plan = stratified_folds(&d, 10, 1).unwrap();
        for fold in per_fold_class_counts(&d, &plan) {
            assert_eq!(fold, vec![5, 5]);
        }
    }

    #[test]
    fn folds_uneven_split_by_enumeration() {
        let d = labeled(&[55, 45]);
        let plan = stratified_folds(&d, 10, 9).unwrap();
        let counts = per_fold_class_counts(&d, &plan);
        assert!(counts.iter().all(|f| (5..=6).contains(&f[0]) && (4..=5).contains(&f[1])));
        assert_eq!(counts.iter().map(|f| f[0]).sum::<usize>(), 55);
        assert_eq!(counts.iter().map(|f| f[1]).sum::<usize>(), 45);
        assert_eq!(plan, stratified_folds(&d, 10, 9).unwrap());
    }

    #[test]
    fn folds_need_enough_samples() {
        let d = labeled(&[20, 9]);
        assert!(matches!(
            stratified_folds(&d, 10, 0),
            Err(DatasetError::TooFewSamples { class: 1, count: 9, folds: 10 })
        ));
    }

    #[test]
    fn batch_examples() {
        let sizes: Vec<usize> = batches(&[0, 1, 2, 3, 4], 2, 0, 0).iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 2, 1]);
        let idx: Vec<usize> = (0..50_000).collect();
        let b = batches(&idx, 128, 3, 0);
        assert_eq!(b.len(), 391);
        assert_eq!(b.last().unwrap().len(), 80);
        assert_eq!(b, batches(&idx, 128, 3, 0));
        assert_ne!(b, batches(&idx, 128, 3, 1));
    }

    #[test]
    fn dedup_drops_repeats() {
        let mut d = labeled(&[3, 3]);
        d.push(HeaderSample::new(vec![0; 12], 0)).unwrap();
        assert_eq!(d.dedup(), 1);
        assert_eq!(d.len(), 6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn csv_round_trip(rows in prop::collection::vec((prop::collection::vec(any::<u8>(), 7), 0usize..3), 0..40)) {
                let samples = rows.into_iter().map(|(b, l)| HeaderSample::new(b, l)).collect();
                let d = Dataset::from_samples(names(3), 7, samples).unwrap();
                let mut buf = Vec::new();
                d.write_csv_to(&mut buf).unwrap();
                prop_assert_eq!(Dataset::read_csv_from(&buf[..]).unwrap(), d);
            }

            #[test]
            fn folds_cover_and_stratify(counts in prop::collection::vec(10usize..60, 2..5), k in 2usize..10, seed in any::<u64>()) {
                let d = labeled(&counts);
                let plan = stratified_folds(&d, k, seed).unwrap();
                prop_assert!(plan.assignments.iter().all(|&f| f < k));
                let per = per_fold_class_counts(&d, &plan);
                for (c, &n) in counts.iter().enumerate() {
                    let lo = n / k;
                    let hi = n.div_ceil(k);
                    prop_assert!(per.iter().all(|f| f[c] >= lo && f[c] <= hi));
                }
            }

            #[test]
            fn batches_cover_each_epoch(n in 0usize..500, bs in 1usize..64, seed in any::<u64>(), epoch in 0u64..10) {
                let idx: Vec<usize> = (0..n).map(|i| i * 3).collect();
                let mut flat: Vec<usize> = batches(&idx, bs, seed, epoch).concat();
                flat.sort_unstable();
                prop_assert_eq!(flat, idx);
            }
        }
    }
}
