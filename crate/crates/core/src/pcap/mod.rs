//! Classic pcap ingestion: read captures, find IPv4 headers, and turn each
//! packet into a fixed-length labeled sample with addresses removed.

mod ingest;
mod ipv4;
mod reader;

pub use ingest::{ingest, FileReport, IngestSummary, LabeledPath};
pub use ipv4::{
    check_input_len, extract_sample, is_supported_link_type, locate_ipv4, Ipv4Header, HEADER_ONLY_LEN,
    MAX_INPUT_LEN,
};
pub use reader::{
    read_pcap, GlobalHeader, PcapReader, PcapRecord, PcapWriter, TsResolution, LINKTYPE_ETHERNET,
    LINKTYPE_LINUX_SLL, LINKTYPE_RAW,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PcapError {
    #[error("{}", unknown_magic_message(*.magic, *.pcapng))]
    UnknownMagic { magic: Option<u32>, pcapng: bool },
    #[error("global header shorter than 24 bytes")]
    TruncatedHeader,
    #[error("truncated record after {good_records} complete records")]
    TruncatedRecord { good_records: usize },
    #[error("unsupported link type {0} (supported: 1 Ethernet, 101 raw IP, 113 Linux cooked)")]
    UnsupportedLinkType(u32),
    #[error("input length {0} not supported: use 12 or a value in 20..=1500")]
    BadInputLen(usize),
    #[error("no pcap inputs given")]
    NoInputs,
    #[error("no IPv4 samples could be extracted from the inputs")]
    NothingIngested,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn unknown_magic_message(magic: Option<u32>, pcapng: bool) -> String {
    match (magic, pcapng) {
        (_, true) => "pcapng files are not supported; convert first, e.g. \
                      `editcap -F pcap in.pcapng out.pcap`"
            .to_string(),
        (Some(m), false) => format!("not a classic pcap file (magic 0x{m:08X})"),
        (None, false) => "not a classic pcap file (empty or too short)".to_string(),
    }
}
