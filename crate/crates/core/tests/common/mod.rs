//! Fixture builders and an independent pcap reader for tests.
#![allow(dead_code)]

use hdrclass::dataset::{Dataset, HeaderSample};

/// Header octets 0-11 of six published ISCX samples, with their labels.
pub const PUBLISHED_HEADERS: [(&str, [u8; 12]); 6] = [
    ("Chat", [69, 0, 4, 143, 108, 209, 64, 0, 128, 6, 3, 94]),
    ("Email", [69, 0, 5, 220, 90, 160, 64, 0, 32, 6, 101, 46]),
    ("File Transfer", [69, 0, 0, 72, 75, 84, 64, 0, 34, 6, 46, 146]),
    ("P2P", [69, 0, 0, 40, 100, 20, 64, 0, 128, 6, 25, 118]),
    ("Streaming", [69, 0, 0, 52, 129, 17, 64, 0, 64, 6, 145, 40]),
    ("VoIP", [69, 0, 0, 211, 172, 169, 64, 0, 76, 6, 251, 65]),
];

pub fn published_dataset() -> Dataset {
    let names = PUBLISHED_HEADERS.iter().map(|(n, _)| n.to_string()).collect();
    let samples = PUBLISHED_HEADERS
        .iter()
        .enumerate()
        .map(|(i, (_, b))| HeaderSample::new(b.to_vec(), i))
        .collect();
    Dataset::from_samples(names, 12, samples).unwrap()
}

/// A whole IPv4 packet whose first 12 header octets are `head`, padded with
/// payload up to the declared Total Length.
pub fn ipv4_packet(head: [u8; 12], src: [u8; 4], dst: [u8; 4]) -> Vec<u8> {
    let total = usize::from(u16::from_be_bytes([head[2], head[3]])).max(20);
    let mut p = Vec::with_capacity(total);
    p.extend_from_slice(&head);
    p.extend_from_slice(&src);
    p.extend_from_slice(&dst);
    p.extend((20..total).map(|i| (i * 7 % 251) as u8));
    p
}

const MACS: [u8; 12] = [0x00, 0x1b, 0x21, 0x3a, 0x4c, 0x5d, 0x00, 0x0c, 0x29, 0x11, 0x22, 0x33];

pub fn ethernet(ethertype: u16, payload: &[u8]) -> Vec<u8> {
    let mut f = MACS.to_vec();
    f.extend_from_slice(&ethertype.to_be_bytes());
    f.extend_from_slice(payload);
    f
}

/// Ethernet frame with 802.1Q tags (outermost first) in front of `ethertype`.
pub fn vlan_ethernet(tags: &[(u16, u16)], ethertype: u16, payload: &[u8]) -> Vec<u8> {
    let mut f = MACS.to_vec();
    for &(tpid, tci) in tags {
        f.extend_from_slice(&tpid.to_be_bytes());
        f.extend_from_slice(&tci.to_be_bytes());
    }
    f.extend_from_slice(&ethertype.to_be_bytes());
    f.extend_from_slice(payload);
    f
}

/// Linux cooked capture (v1) header plus payload.
pub fn sll(protocol: u16, payload: &[u8]) -> Vec<u8> {
    let mut f = vec![0, 0, 0, 1, 0, 6, 0x00, 0x0c, 0x29, 0x11, 0x22, 0x33, 0, 0];
    f.extend_from_slice(&protocol.to_be_bytes());
    f.extend_from_slice(payload);
    f
}

pub fn ipv6_packet() -> Vec<u8> {
    let mut p = vec![0x60, 0, 0, 0, 0, 8, 17, 64];
    p.extend_from_slice(&[0xfe; 32]);
    p.extend_from_slice(&[0; 8]);
    p
}

pub fn arp_payload() -> Vec<u8> {
    vec![0, 1, 8, 0, 6, 4, 0, 1, 0, 0x0c, 0x29, 0x11, 0x22, 0x33, 10, 0, 0, 1, 0, 0, 0, 0, 0, 0, 10, 0, 0, 2]
}

/// Hand-assembled classic pcap bytes, independent of the library writer.
pub fn pcap_bytes(link: u32, big_endian: bool, nanos: bool, frames: &[Vec<u8>]) -> Vec<u8> {
    let u32b = |v: u32| if big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
    let u16b = |v: u16| if big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
    let magic: u32 = if nanos { 0xa1b2_3c4d } else { 0xa1b2_c3d4 };
    let mut out = Vec::new();
    out.extend_from_slice(&u32b(magic));
    out.extend_from_slice(&u16b(2));
    out.extend_from_slice(&u16b(4));
    out.extend_from_slice(&[0; 8]);
    out.extend_from_slice(&u32b(262_144));
    out.extend_from_slice(&u32b(link));
    for (i, f) in frames.iter().enumerate() {
        out.extend_from_slice(&u32b(1_600_000_000 + i as u32));
        out.extend_from_slice(&u32b(if nanos { 123_456_789 } else { 123_456 }));
        out.extend_from_slice(&u32b(f.len() as u32));
        out.extend_from_slice(&u32b(f.len() as u32));
        out.extend_from_slice(f);
    }
    out
}

/// Straightforward reference extraction of 12-byte samples from pcap bytes.
pub fn oracle_samples(file: &[u8]) -> Vec<[u8; 12]> {
    let be = match file[..4] {
        [0xa1, 0xb2, 0xc3, 0xd4] | [0xa1, 0xb2, 0x3c, 0x4d] => true,
        [0xd4, 0xc3, 0xb2, 0xa1] | [0x4d, 0x3c, 0xb2, 0xa1] => false,
        _ => panic!("oracle: not a pcap"),
    };
    let rd = |at: usize| {
        let b = [file[at], file[at + 1], file[at + 2], file[at + 3]];
        if be {
            u32::from_be_bytes(b)
        } else {
            u32::from_le_bytes(b)
        }
    };
    let link = rd(20) & 0xffff;
    let mut at = 24;
    let mut out = Vec::new();
    while at + 16 <= file.len() {
        let caplen = rd(at + 8) as usize;
        let frame = &file[at + 16..at + 16 + caplen];
        at += 16 + caplen;
        let ip = match link {
            101 => Some(frame),
            113 if frame.len() >= 16 && frame[14..16] == [8, 0] => Some(&frame[16..]),
            1 => {
                let mut off = 12;
                let mut hops = 0;
                while hops < 2 && frame.len() >= off + 4 && matches!(frame[off..off + 2], [0x81, 0x00] | [0x88, 0xa8]) {
                    off += 4;
                    hops += 1;
                }
                (frame.len() >= off + 2 && frame[off..off + 2] == [8, 0]).then(|| &frame[off + 2..])
            }
            _ => None,
        };
        if let Some(ip) = ip {
            if ip.len() >= 20 && ip[0] >> 4 == 4 {
                out.push(ip[..12].try_into().unwrap());
            }
        }
    }
    out
}
