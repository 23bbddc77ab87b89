//! Build two small captures in memory, ingest them as labeled classes and
//! print the resulting samples.
//!
//! cargo run --example ingest_pcap -- [input_len]

use hdrclass::pcap::{ingest, Ipv4Header, LabeledPath, PcapWriter, TsResolution, LINKTYPE_ETHERNET, LINKTYPE_RAW};

fn packet(total_length: u16, ttl: u8, protocol: u8) -> Vec<u8> {
    let h = Ipv4Header {
        version: 4,
        ihl: 5,
        tos: 0,
        total_length,
        identification: 0x1234,
        flags_fragment: 0x4000,
        ttl,
        protocol,
        checksum: 0,
        src_addr: [10, 0, 0, 1],
        dst_addr: [10, 0, 0, 2],
        raw20: [0; 20],
    };
    let mut p = h.to_bytes().to_vec();
    p.resize(usize::from(total_length), 0xab);
    p
}

fn ethernet(payload: &[u8]) -> Vec<u8> {
    let mut f = vec![0x02, 0, 0, 0, 0, 1, 0x02, 0, 0, 0, 0, 2, 0x08, 0x00];
    f.extend_from_slice(payload);
    f
}

fn main() -> anyhow::Result<()> {
    let input_len = std::env::args().nth(1).map_or(Ok(12), |s| s.parse())?;
    let dir = tempfile_dir()?;

    let mut web = PcapWriter::new(LINKTYPE_ETHERNET, false, TsResolution::Micros);
    for (i, len) in [1500u16, 1500, 52, 40].into_iter().enumerate() {
        web.record(1_700_000_000 + i as u32, 0, &ethernet(&packet(len, 64, 6)));
    }
    let mut dns = PcapWriter::new(LINKTYPE_RAW, true, TsResolution::Nanos);
    for (i, len) in [61u16, 77, 93].into_iter().enumerate() {
        dns.record(1_700_000_000, i as u32 * 1000, &packet(len, 128, 17));
    }
    let web_path = dir.join("web.pcap");
    let dns_path = dir.join("dns.pcap");
    std::fs::write(&web_path, web.bytes())?;
    std::fs::write(&dns_path, dns.bytes())?;

    let (data, summary) = ingest(
        &[LabeledPath::new(&web_path, "web"), LabeledPath::new(&dns_path, "dns")],
        input_len,
    )?;
    println!(
        "{} records read, {} IPv4 samples, {} skipped",
        summary.records_read, summary.ipv4_found, summary.skipped
    );
    for s in data.samples() {
        println!("{:>4}  {:?}", data.class_names()[s.label], s.bytes);
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn tempfile_dir() -> std::io::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("hdrclass-ingest-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
