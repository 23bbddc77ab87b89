//! Per-class, per-byte histograms of normalized header values.
//!
//! Each byte `v` is scaled to `v / 255` and counted in one of 20 bins of
//! width 0.05. Bins are left-closed and right-open except the last, which
//! is closed, so only 255 reaches `1.0` and it lands in bin 19.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;

pub const BINS: usize = 20;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("cannot compute histograms of an empty dataset")]
    EmptyDataset,
    #[error("malformed grid file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Csv,
    Json,
}

impl std::str::FromStr for GridFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(GridFormat::Csv),
            "json" => Ok(GridFormat::Json),
            other => Err(format!("unknown grid format {other:?} (csv or json)")),
        }
    }
}

/// Bin index of a raw byte value.
///
/// `v / 255 >= b / 20` is the same as `20 v >= 255 b`, so integer floor
/// division gives the left-closed rule exactly, edges included.
pub fn bin_of(v: u8) -> usize {
    ((usize::from(v) * BINS) / 255).min(BINS - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramGrid {
    pub class_names: Vec<String>,
    pub input_len: usize,
    pub bin_edges: Vec<f64>,
    pub per_class_totals: Vec<u64>,
    /// `counts[class][byte][bin]`
    pub counts: Vec<Vec<[u64; BINS]>>,
}

fn bin_edges() -> Vec<f64> {
    (0..=BINS).map(|b| b as f64 / BINS as f64).collect()
}

pub fn compute_histograms(dataset: &Dataset) -> Result<HistogramGrid, StatsError> {
    if dataset.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    let t = dataset.num_classes();
    let n = dataset.input_len();
    let mut counts = vec![vec![[0u64; BINS]; n]; t];
    let mut totals = vec![0u64; t];
    for s in dataset.samples() {
        totals[s.label] += 1;
        for (pos, &v) in s.bytes.iter().enumerate() {
            counts[s.label][pos][bin_of(v)] += 1;
        }
    }
    Ok(HistogramGrid {
        class_names: dataset.class_names().to_vec(),
        input_len: n,
        bin_edges: bin_edges(),
        per_class_totals: totals,
        counts,
    })
}

impl HistogramGrid {
    pub fn count(&self, class: usize, byte: usize, bin: usize) -> u64 {
        self.counts[class][byte][bin]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# classes: {}", self.class_names.join(",")).unwrap();
        out.push_str("class,byte,bin,count\n");
        for (c, per_byte) in self.counts.iter().enumerate() {
            for (n, bins) in per_byte.iter().enumerate() {
                for (b, count) in bins.iter().enumerate() {
                    writeln!(out, "{c},{n},{b},{count}").unwrap();
                }
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, StatsError> {
        let mut names = None;
        let mut rows = Vec::new();
        let mut header_seen = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("# classes:") {
                names = Some(rest.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>());
                continue;
            }
            if !header_seen {
                if line != "class,byte,bin,count" {
                    return Err(StatsError::Malformed(format!("bad header {line:?}")));
                }
                header_seen = true;
                continue;
            }
            let f: Vec<u64> = line
                .split(',')
                .map(|x| x.trim().parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|e| StatsError::Malformed(format!("{line:?}: {e}")))?;
            if f.len() != 4 || f[2] as usize >= BINS {
                return Err(StatsError::Malformed(format!("bad row {line:?}")));
            }
            rows.push(f);
        }
        let names = names.ok_or_else(|| StatsError::Malformed("missing classes line".into()))?;
        let n = rows.iter().map(|r| r[1] as usize + 1).max().unwrap_or(0);
        let mut counts = vec![vec![[0u64; BINS]; n]; names.len()];
        for r in rows {
            let c = r[0] as usize;
            if c >= names.len() {
                return Err(StatsError::Malformed(format!("class {c} not declared")));
            }
            counts[c][r[1] as usize][r[2] as usize] = r[3];
        }
        let per_class_totals = counts
            .iter()
            .map(|bytes| bytes.first().map_or(0, |bins| bins.iter().sum()))
            .collect();
        Ok(HistogramGrid {
            class_names: names,
            input_len: n,
            bin_edges: bin_edges(),
            per_class_totals,
            counts,
        })
    }

    pub fn export(&self, path: impl AsRef<Path>, format: GridFormat) -> Result<(), StatsError> {
        let text = match format {
            GridFormat::Csv => self.to_csv(),
            GridFormat::Json => serde_json::to_string_pretty(self)?,
        };
        fs::write(path, text)?;
        Ok(())
    }

    pub fn import(path: impl AsRef<Path>, format: GridFormat) -> Result<Self, StatsError> {
        let text = fs::read_to_string(path)?;
        match format {
            GridFormat::Csv => Self::from_csv(&text),
            GridFormat::Json => Ok(serde_json::from_str(&text)?),
        }
    }
}
