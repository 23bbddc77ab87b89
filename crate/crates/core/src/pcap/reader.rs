use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::Path;

use super::PcapError;

pub const LINKTYPE_ETHERNET: u32 = 1;
pub const LINKTYPE_RAW: u32 = 101;
pub const LINKTYPE_LINUX_SLL: u32 = 113;

const MAGIC_MICROS: u32 = 0xA1B2_C3D4;
const MAGIC_NANOS: u32 = 0xA1B2_3C4D;
const MAGIC_PCAPNG: u32 = 0x0A0D_0D0A;

/// Timestamp resolution declared by the file magic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsResolution {
    Micros,
    Nanos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlobalHeader {
    pub big_endian: bool,
    pub resolution: TsResolution,
    pub version_major: u16,
    pub version_minor: u16,
    pub snaplen: u32,
    pub link_type: u32,
}

/// One captured frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcapRecord {
    pub timestamp_secs: u32,
    /// Micro- or nanoseconds, depending on [`GlobalHeader::resolution`].
    pub timestamp_frac: u32,
    pub captured_len: u32,
    pub original_len: u32,
    pub link_payload: Vec<u8>,
}

impl PcapRecord {
    /// Some writers store more bytes than the frame's original length.
    pub fn has_length_anomaly(&self) -> bool {
        self.captured_len > self.original_len
    }
}

/// Streaming reader over a classic pcap file.
///
/// Yields records in file order. After a truncated record the iterator
/// reports [`PcapError::TruncatedRecord`] once and then stops.
pub struct PcapReader<R> {
    inner: R,
    header: GlobalHeader,
    good: usize,
    done: bool,
}

impl PcapReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, PcapError> {
        let file = File::open(path.as_ref()).map_err(PcapError::Io)?;
        Self::new(BufReader::new(file))
    }
}

impl<R: Read> PcapReader<R> {
    pub fn new(mut inner: R) -> Result<Self, PcapError> {
        let mut buf = [0u8; 24];
        let got = read_full(&mut inner, &mut buf).map_err(PcapError::Io)?;
        if got < 4 {
            return Err(PcapError::UnknownMagic {
                magic: None,
                pcapng: false,
            });
        }
        let le = u32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]);
        let (big_endian, resolution) = match le {
            MAGIC_MICROS => (false, TsResolution::Micros),
            MAGIC_NANOS => (false, TsResolution::Nanos),
            m if m.swap_bytes() == MAGIC_MICROS => (true, TsResolution::Micros),
            m if m.swap_bytes() == MAGIC_NANOS => (true, TsResolution::Nanos),
            m => {
                return Err(PcapError::UnknownMagic {
                    magic: Some(m),
                    pcapng: m == MAGIC_PCAPNG,
                })
            }
        };
        if got < 24 {
            return Err(PcapError::TruncatedHeader);
        }
        let u16_at = |i: usize| {
            let b = [buf[i], buf[i + 1]];
            if big_endian {
                u16::from_be_bytes(b)
            } else {
                u16::from_le_bytes(b)
            }
        };
        let u32_at = |i: usize| read_u32(&buf[i..i + 4], big_endian);
        let header = GlobalHeader {
            big_endian,
            resolution,
            version_major: u16_at(4),
            version_minor: u16_at(6),
            snaplen: u32_at(16),
            // upper bits may carry FCS info; the link type is the low 16 bits
            link_type: u32_at(20) & 0xFFFF,
        };
        Ok(PcapReader {
            inner,
            header,
            good: 0,
            done: false,
        })
    }

    pub fn header(&self) -> &GlobalHeader {
        &self.header
    }

    pub fn link_type(&self) -> u32 {
        self.header.link_type
    }

    /// Number of complete records read so far.
    pub fn records_read(&self) -> usize {
        self.good
    }

    fn next_record(&mut self) -> Result<Option<PcapRecord>, PcapError> {
        let mut rh = [0u8; 16];
        let got = read_full(&mut self.inner, &mut rh).map_err(PcapError::Io)?;
        if got == 0 {
            return Ok(None);
        }
        if got < 16 {
            return Err(PcapError::TruncatedRecord {
                good_records: self.good,
            });
        }
        let be = self.header.big_endian;
        let captured_len = read_u32(&rh[8..12], be);
        let mut link_payload = Vec::new();
        (&mut self.inner)
            .take(u64::from(captured_len))
            .read_to_end(&mut link_payload)
            .map_err(PcapError::Io)?;
        if link_payload.len() != captured_len as usize {
            return Err(PcapError::TruncatedRecord {
                good_records: self.good,
            });
        }
        self.good += 1;
        Ok(Some(PcapRecord {
            timestamp_secs: read_u32(&rh[0..4], be),
            timestamp_frac: read_u32(&rh[4..8], be),
            captured_len,
            original_len: read_u32(&rh[12..16], be),
            link_payload,
        }))
    }
}

impl<R: Read> Iterator for PcapReader<R> {
    type Item = Result<PcapRecord, PcapError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_record() {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Reads a whole pcap file: its link type plus every record.
pub fn read_pcap(path: impl AsRef<Path>) -> Result<(u32, Vec<PcapRecord>), PcapError> {
    let reader = PcapReader::open(path)?;
    let link = reader.link_type();
    let records = reader.collect::<Result<Vec<_>, _>>()?;
    Ok((link, records))
}

fn read_u32(b: &[u8], big_endian: bool) -> u32 {
    let a = [b[0], b[1], b[2], b[3]];
    if big_endian {
        u32::from_be_bytes(a)
    } else {
        u32::from_le_bytes(a)
    }
}

/// Fills as much of `buf` as the reader provides; returns the byte count.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Serializes a pcap file in memory. Used by tests, examples and the
/// latency benchmark to build captures without touching the network.
#[derive(Debug, Clone)]
pub struct PcapWriter {
    big_endian: bool,
    resolution: TsResolution,
    buf: Vec<u8>,
}

impl PcapWriter {
    pub fn new(link_type: u32, big_endian: bool, resolution: TsResolution) -> Self {
        let magic = match resolution {
            TsResolution::Micros => MAGIC_MICROS,
            TsResolution::Nanos => MAGIC_NANOS,
        };
        let mut w = PcapWriter {
            big_endian,
            resolution,
            buf: Vec::new(),
        };
        w.put_u32(magic);
        w.put_u16(2);
        w.put_u16(4);
        w.put_u32(0);
        w.put_u32(0);
        w.put_u32(65535);
        w.put_u32(link_type);
        w
    }

    pub fn resolution(&self) -> TsResolution {
        self.resolution
    }

    pub fn record(&mut self, secs: u32, frac: u32, frame: &[u8]) -> &mut Self {
        self.put_u32(secs);
        self.put_u32(frac);
        self.put_u32(frame.len() as u32);
        self.put_u32(frame.len() as u32);
        self.buf.extend_from_slice(frame);
        self
    }

    pub fn bytes(&self) -> &[u8] {
        &self.buf
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    fn put_u16(&mut self, v: u16) {
        let b = if self.big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
        self.buf.extend_from_slice(&b);
    }

    fn put_u32(&mut self, v: u32) {
        let b = if self.big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
        self.buf.extend_from_slice(&b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_unknown_magic() {
        let err = PcapReader::new(&[][..]).err().unwrap();
        assert!(matches!(err, PcapError::UnknownMagic { magic: None, .. }));
    }

    #[test]
    fn pcapng_gets_its_own_message() {
        let ng = [0x0A, 0x0D, 0x0D, 0x0A, 0, 0, 0, 0];
        let err = PcapReader::new(&ng[..]).err().unwrap();
        assert!(matches!(err, PcapError::UnknownMagic { pcapng: true, .. }));
        assert!(err.to_string().contains("pcapng"));
    }

    #[test]
    fn zero_records_reports_link_type() {
        let w = PcapWriter::new(LINKTYPE_RAW, true, TsResolution::Nanos);
        let mut r = PcapReader::new(w.bytes()).unwrap();
        assert_eq!(r.link_type(), LINKTYPE_RAW);
        assert_eq!(r.header().resolution, TsResolution::Nanos);
        assert!(r.header().big_endian);
        assert!(r.next().is_none());
    }

    #[test]
    fn truncated_body_stops_with_good_count() {
        let mut w = PcapWriter::new(LINKTYPE_ETHERNET, false, TsResolution::Micros);
        w.record(1, 2, &[0u8; 30]).record(3, 4, &[1u8; 30]);
        let mut bytes = w.into_bytes();
        bytes.truncate(bytes.len() - 5);
        let out: Vec<_> = PcapReader::new(&bytes[..]).unwrap().collect();
        assert_eq!(out.len(), 2);
        assert!(out[0].is_ok());
        assert!(matches!(
            out[1],
            Err(PcapError::TruncatedRecord { good_records: 1 })
        ));
    }

    #[test]
    fn truncated_record_header() {
        let mut w = PcapWriter::new(LINKTYPE_ETHERNET, false, TsResolution::Micros);
        w.record(1, 2, &[0u8; 4]);
        let mut bytes = w.into_bytes();
        bytes.extend_from_slice(&[0u8; 7]);
        let out: Vec<_> = PcapReader::new(&bytes[..]).unwrap().collect();
        assert!(matches!(
            out.last().unwrap(),
            Err(PcapError::TruncatedRecord { good_records: 1 })
        ));
    }

    #[test]
    fn length_anomaly_is_flagged() {
        let r = PcapRecord {
            timestamp_secs: 0,
            timestamp_frac: 0,
            captured_len: 60,
            original_len: 54,
            link_payload: vec![0; 60],
        };
        assert!(r.has_length_anomaly());
    }
}
