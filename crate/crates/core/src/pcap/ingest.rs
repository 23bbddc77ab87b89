use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ipv4::{check_input_len, extract_sample, is_supported_link_type};
use super::reader::PcapReader;
use super::PcapError;
use crate::dataset::{Dataset, HeaderSample, SourceMeta};

/// A capture file and the class name its packets belong to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPath {
    pub path: PathBuf,
    pub label: String,
}

impl LabeledPath {
    pub fn new(path: impl Into<PathBuf>, label: impl Into<String>) -> Self {
        LabeledPath {
            path: path.into(),
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileReport {
    pub path: PathBuf,
    pub label: String,
    pub link_type: Option<u32>,
    pub records: usize,
    pub ipv4: usize,
    pub skipped: usize,
    /// Records whose captured length exceeds the original length.
    pub length_anomalies: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub input_len: usize,
    pub records_read: usize,
    pub ipv4_found: usize,
    pub skipped: usize,
    pub per_label: BTreeMap<String, usize>,
    pub files: Vec<FileReport>,
}

/// Reads every capture and concatenates the samples in input order.
///
/// Class indices follow the order in which label names first appear.
/// A broken file is reported in the summary and does not stop the others;
/// records read before a truncation are kept.
pub fn ingest(inputs: &[LabeledPath], input_len: usize) -> Result<(Dataset, IngestSummary), PcapError> {
    if inputs.is_empty() {
        return Err(PcapError::NoInputs);
    }
    check_input_len(input_len)?;

    let mut class_names: Vec<String> = Vec::new();
    let labels: Vec<usize> = inputs
        .iter()
        .map(|inp| match class_names.iter().position(|n| *n == inp.label) {
            Some(i) => i,
            None => {
                class_names.push(inp.label.clone());
                class_names.len() - 1
            }
        })
        .collect();

    let per_file: Vec<(FileReport, Vec<HeaderSample>)> = inputs
        .par_iter()
        .zip(labels.par_iter())
        .map(|(inp, &label)| ingest_file(inp, label, input_len))
        .collect();

    let mut summary = IngestSummary {
        input_len,
        ..Default::default()
    };
    for name in &class_names {
        summary.per_label.insert(name.clone(), 0);
    }
    let mut dataset = Dataset::new(class_names, input_len);
    for (report, samples) in per_file {
        summary.records_read += report.records;
        summary.ipv4_found += report.ipv4;
        summary.skipped += report.skipped;
        *summary.per_label.entry(report.label.clone()).or_default() += samples.len();
        for s in samples {
            dataset.push(s).expect("extracted samples match dataset shape");
        }
        summary.files.push(report);
    }
    if dataset.is_empty() {
        return Err(PcapError::NothingIngested);
    }
    Ok((dataset, summary))
}

fn ingest_file(inp: &LabeledPath, label: usize, input_len: usize) -> (FileReport, Vec<HeaderSample>) {
    let mut report = FileReport {
        path: inp.path.clone(),
        label: inp.label.clone(),
        ..Default::default()
    };
    let mut samples = Vec::new();
    let reader = match PcapReader::open(&inp.path) {
        Ok(r) => r,
        Err(e) => {
            report.error = Some(e.to_string());
            return (report, samples);
        }
    };
    let link = reader.link_type();
    report.link_type = Some(link);
    if !is_supported_link_type(link) {
        report.error = Some(PcapError::UnsupportedLinkType(link).to_string());
        return (report, samples);
    }
    for (i, rec) in reader.enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                report.error = Some(e.to_string());
                break;
            }
        };
        report.records += 1;
        if rec.has_length_anomaly() {
            report.length_anomalies += 1;
        }
        match extract_sample(&rec, link, label, input_len) {
            Ok(Some(mut s)) => {
                s.source = Some(SourceMeta {
                    file: inp.path.clone(),
                    record: i,
                });
                report.ipv4 += 1;
                samples.push(s);
            }
            Ok(None) => report.skipped += 1,
            Err(e) => {
                report.error = Some(e.to_string());
                break;
            }
        }
    }
    (report, samples)
}
