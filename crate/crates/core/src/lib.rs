//! Network traffic classification from IPv4 packet headers.
//!
//! Each packet becomes a short byte vector: the first 12 octets of its
//! IPv4 header, with source and destination addresses left out. An
//! external-attention network with a convolutional head maps the vector
//! to a service class.
//!
//! Modules, in pipeline order:
//!
//! - [`pcap`]: classic pcap reading and sample extraction
//! - [`dataset`]: labeled samples, CSV files, synthetic data, folds
//! - [`stats`]: per-class byte histograms
//! - [`grad`]: the reverse-mode gradient engine
//! - [`model`]: the classifier and its file format
//! - [`train`]: Adam training, cross-validation, grid sweeps
//! - [`metrics`]: confusion-matrix metrics and latency timing
//! - [`cli`]: the `hdrclass` command line

pub mod cli;
pub mod dataset;
pub mod grad;
pub mod metrics;
pub mod model;
pub mod pcap;
pub mod stats;
pub mod train;
