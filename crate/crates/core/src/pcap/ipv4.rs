use super::reader::{PcapRecord, LINKTYPE_ETHERNET, LINKTYPE_LINUX_SLL, LINKTYPE_RAW};
use super::PcapError;
use crate::dataset::HeaderSample;

const ETHERTYPE_IPV4: u16 = 0x0800;
const ETHERTYPE_VLAN: u16 = 0x8100;
const ETHERTYPE_QINQ: u16 = 0x88A8;
const ETHERNET_HEADER: usize = 14;
const SLL_HEADER: usize = 16;
const MAX_VLAN_TAGS: usize = 2;

/// Octets 12..20 of the header hold the source and destination addresses.
const ADDR_START: usize = 12;
const ADDR_END: usize = 20;

pub const HEADER_ONLY_LEN: usize = 12;
pub const MAX_INPUT_LEN: usize = 1500;

/// The fixed 20-byte part of an IPv4 header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ipv4Header {
    pub version: u8,
    /// Header length in 32-bit words.
    pub ihl: u8,
    pub tos: u8,
    pub total_length: u16,
    pub identification: u16,
    pub flags_fragment: u16,
    pub ttl: u8,
    pub protocol: u8,
    pub checksum: u16,
    pub src_addr: [u8; 4],
    pub dst_addr: [u8; 4],
    pub raw20: [u8; 20],
}

impl Ipv4Header {
    /// Parses the first 20 bytes. Returns `None` unless version is 4 and
    /// IHL is at least 5. The checksum is not verified.
    pub fn parse(bytes: &[u8]) -> Option<Ipv4Header> {
        let raw20: [u8; 20] = bytes.get(..20)?.try_into().ok()?;
        let version = raw20[0] >> 4;
        let ihl = raw20[0] & 0x0F;
        if version != 4 || ihl < 5 {
            return None;
        }
        let be16 = |i: usize| u16::from_be_bytes([raw20[i], raw20[i + 1]]);
        Some(Ipv4Header {
            version,
            ihl,
            tos: raw20[1],
            total_length: be16(2),
            identification: be16(4),
            flags_fragment: be16(6),
            ttl: raw20[8],
            protocol: raw20[9],
            checksum: be16(10),
            src_addr: raw20[12..16].try_into().unwrap(),
            dst_addr: raw20[16..20].try_into().unwrap(),
            raw20,
        })
    }

    /// Serializes the named fields back to wire order.
    pub fn to_bytes(&self) -> [u8; 20] {
        let mut out = [0u8; 20];
        out[0] = (self.version << 4) | (self.ihl & 0x0F);
        out[1] = self.tos;
        out[2..4].copy_from_slice(&self.total_length.to_be_bytes());
        out[4..6].copy_from_slice(&self.identification.to_be_bytes());
        out[6..8].copy_from_slice(&self.flags_fragment.to_be_bytes());
        out[8] = self.ttl;
        out[9] = self.protocol;
        out[10..12].copy_from_slice(&self.checksum.to_be_bytes());
        out[12..16].copy_from_slice(&self.src_addr);
        out[16..20].copy_from_slice(&self.dst_addr);
        out
    }

    pub fn header_len(&self) -> usize {
        usize::from(self.ihl) * 4
    }
}

pub fn is_supported_link_type(link_type: u32) -> bool {
    matches!(link_type, LINKTYPE_ETHERNET | LINKTYPE_RAW | LINKTYPE_LINUX_SLL)
}

/// Finds the IPv4 header inside a link-layer frame.
///
/// Returns `Ok(None)` for frames that do not carry IPv4 (ARP, IPv6, short
/// or garbled frames); only an unsupported link type is an error.
pub fn locate_ipv4(frame: &[u8], link_type: u32) -> Result<Option<(Ipv4Header, usize)>, PcapError> {
    let offset = match link_type {
        LINKTYPE_ETHERNET => ethernet_payload_offset(frame),
        LINKTYPE_RAW => Some(0),
        LINKTYPE_LINUX_SLL => {
            let proto = frame.get(14..16).map(|b| u16::from_be_bytes([b[0], b[1]]));
            (proto == Some(ETHERTYPE_IPV4)).then_some(SLL_HEADER)
        }
        other => return Err(PcapError::UnsupportedLinkType(other)),
    };
    Ok(offset.and_then(|off| {
        let hdr = Ipv4Header::parse(frame.get(off..)?)?;
        Some((hdr, off))
    }))
}

fn ethernet_payload_offset(frame: &[u8]) -> Option<usize> {
    let ethertype_at = |i: usize| frame.get(i..i + 2).map(|b| u16::from_be_bytes([b[0], b[1]]));
    let mut type_pos = ETHERNET_HEADER - 2;
    let mut tags = 0;
    loop {
        match ethertype_at(type_pos)? {
            ETHERTYPE_IPV4 => return Some(type_pos + 2),
            ETHERTYPE_VLAN | ETHERTYPE_QINQ if tags < MAX_VLAN_TAGS => {
                tags += 1;
                type_pos += 4;
            }
            _ => return None,
        }
    }
}

pub fn check_input_len(input_len: usize) -> Result<(), PcapError> {
    if input_len == HEADER_ONLY_LEN || (ADDR_END..=MAX_INPUT_LEN).contains(&input_len) {
        Ok(())
    } else {
        Err(PcapError::BadInputLen(input_len))
    }
}

/// Builds a model input from one captured frame.
///
/// With `input_len == 12` the sample is the first 12 header octets: the
/// 20-byte header minus its trailing source and destination addresses.
/// With `input_len >= 20` it is the first `input_len` octets of the IP
/// packet with the address octets zeroed, right-padded with zeros.
pub fn extract_sample(
    record: &PcapRecord,
    link_type: u32,
    label: usize,
    input_len: usize,
) -> Result<Option<HeaderSample>, PcapError> {
    check_input_len(input_len)?;
    let Some((header, offset)) = locate_ipv4(&record.link_payload, link_type)? else {
        return Ok(None);
    };
    Ok(Some(HeaderSample::new(sample_bytes(&header, &record.link_payload[offset..], input_len), label)))
}

/// `packet` starts at the IPv4 header. `input_len` must already be valid.
pub(crate) fn sample_bytes(header: &Ipv4Header, packet: &[u8], input_len: usize) -> Vec<u8> {
    if input_len == HEADER_ONLY_LEN {
        return header.raw20[..ADDR_START].to_vec();
    }
    // Trailing link-layer padding is not part of the packet.
    let declared = usize::from(header.total_length);
    let end = if declared >= header.header_len().max(ADDR_END) {
        declared.min(packet.len())
    } else {
        packet.len()
    };
    let mut out = vec![0u8; input_len];
    let take = end.min(input_len);
    out[..take].copy_from_slice(&packet[..take]);
    for b in &mut out[ADDR_START..ADDR_END] {
        *b = 0;
    }
    out
}
