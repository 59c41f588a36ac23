//! Bandwidth sub-protocol packets (protocol id 30): the breakthrough
//! warm-up exchange and the four-stage measurement probes.
//!
//! Probe layout (fixed, not the envelope format):
//!
//! ```text
//! byte 0       protocol id (30)
//! byte 1       packet type
//! bytes 2-5    identifying token
//! bytes 6-7    peer port
//! bytes 8-11   sequence number          (types 2-5 only)
//! bytes 12-19  send time, microseconds  (types 2-5 only)
//! byte 20      multiplication factor    (types 2-5 only)
//! bytes 21-24  base payload size        (types 2-5 only)
//! rest         filler payload
//! ```
//!
//! The base payload size `S` counts the *whole datagram*: a request of
//! factor `k` is exactly `k * S` bytes on the wire and every measurement
//! reply is exactly `S` bytes, so the serialization-time algebra of the
//! estimator sees the sizes it assumes. The filler is random bits so that
//! compressing modems cannot shrink the packets.

use super::{WireError, BW_PROTOCOL_ID};

/// Bytes 0..25 of a probe packet; everything except the filler payload.
pub const BW_HEADER_LEN: usize = 25;

const BREAKTHROUGH_LEN: usize = 8;

/// Probe packet types (byte 1 values 2..=5).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ProbeKind {
    /// Type 2: single measurement request.
    Request = 2,
    /// Type 3: measurement reply, always base-size.
    Reply = 3,
    /// Type 4: first packet of a back-to-back pair.
    PairFirst = 4,
    /// Type 5: second packet of a back-to-back pair; the only one answered.
    PairSecond = 5,
}

impl ProbeKind {
    fn from_u8(v: u8) -> Option<Self> {
        match v {
            2 => Some(ProbeKind::Request),
            3 => Some(ProbeKind::Reply),
            4 => Some(ProbeKind::PairFirst),
            5 => Some(ProbeKind::PairSecond),
            _ => None,
        }
    }

    /// Total on-wire size for a probe of this kind.
    pub fn wire_size(self, multiplication_factor: u8, base_payload_size: u32) -> usize {
        match self {
            ProbeKind::Reply => base_payload_size as usize,
            _ => multiplication_factor as usize * base_payload_size as usize,
        }
    }
}

/// A measurement probe (types 2-5).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbePacket {
    pub kind: ProbeKind,
    pub token: u32,
    pub peer_port: u16,
    pub sequence: u32,
    pub send_time_us: u64,
    pub multiplication_factor: u8,
    pub base_payload_size: u32,
    pub payload: Vec<u8>,
}

impl ProbePacket {
    /// The filler length that makes the packet its declared wire size.
    pub fn expected_payload_len(
        kind: ProbeKind,
        multiplication_factor: u8,
        base_payload_size: u32,
    ) -> Result<usize, WireError> {
        if multiplication_factor == 0 {
            return Err(WireError::InvalidFieldValue {
                what: "multiplication factor",
                value: 0,
            });
        }
        let total = kind.wire_size(multiplication_factor, base_payload_size);
        total
            .checked_sub(BW_HEADER_LEN)
            .ok_or(WireError::InvalidFieldValue {
                what: "base payload size below header length",
                value: base_payload_size as u64,
            })
    }
}

/// A Bandwidth sub-protocol packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BwPacket {
    /// Type 0: warms up caches along the path before measuring.
    BreakthroughRequest { token: u32, peer_port: u16 },
    /// Type 1.
    BreakthroughReply { token: u32, peer_port: u16 },
    Probe(ProbePacket),
}

impl BwPacket {
    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        match self {
            BwPacket::BreakthroughRequest { token, peer_port }
            | BwPacket::BreakthroughReply { token, peer_port } => {
                let ty = u8::from(matches!(self, BwPacket::BreakthroughReply { .. }));
                let mut buf = Vec::with_capacity(BREAKTHROUGH_LEN);
                buf.push(BW_PROTOCOL_ID);
                buf.push(ty);
                buf.extend_from_slice(&token.to_be_bytes());
                buf.extend_from_slice(&peer_port.to_be_bytes());
                Ok(buf)
            }
            BwPacket::Probe(p) => {
                let expected = ProbePacket::expected_payload_len(
                    p.kind,
                    p.multiplication_factor,
                    p.base_payload_size,
                )?;
                if p.payload.len() != expected {
                    return Err(WireError::FieldSizeMismatch {
                        what: "probe payload",
                        declared: expected,
                        available: p.payload.len(),
                    });
                }
                let mut buf = Vec::with_capacity(BW_HEADER_LEN + p.payload.len());
                buf.push(BW_PROTOCOL_ID);
                buf.push(p.kind as u8);
                buf.extend_from_slice(&p.token.to_be_bytes());
                buf.extend_from_slice(&p.peer_port.to_be_bytes());
                buf.extend_from_slice(&p.sequence.to_be_bytes());
                buf.extend_from_slice(&p.send_time_us.to_be_bytes());
                buf.push(p.multiplication_factor);
                buf.extend_from_slice(&p.base_payload_size.to_be_bytes());
                buf.extend_from_slice(&p.payload);
                Ok(buf)
            }
        }
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() < 2 {
            return Err(WireError::TruncatedPacket {
                what: "bandwidth packet header",
                needed: 2 - bytes.len(),
            });
        }
        if bytes[0] != BW_PROTOCOL_ID {
            return Err(WireError::ProtocolIdMismatch {
                expected: BW_PROTOCOL_ID,
                found: bytes[0],
            });
        }
        let ty = bytes[1];
        match ty {
            0 | 1 => {
                if bytes.len() < BREAKTHROUGH_LEN {
                    return Err(WireError::TruncatedPacket {
                        what: "breakthrough packet",
                        needed: BREAKTHROUGH_LEN - bytes.len(),
                    });
                }
                if bytes.len() > BREAKTHROUGH_LEN {
                    return Err(WireError::TrailingBytes {
                        count: bytes.len() - BREAKTHROUGH_LEN,
                    });
                }
                let token = u32::from_be_bytes([bytes[2], bytes[3], bytes[4], bytes[5]]);
                let peer_port = u16::from_be_bytes([bytes[6], bytes[7]]);
                Ok(if ty == 0 {
                    BwPacket::BreakthroughRequest { token, peer_port }
                } else {
                    BwPacket::BreakthroughReply { token, peer_port }
                })
            }
            2..=5 => {
                let kind = ProbeKind::from_u8(ty).expect("range checked");
                if bytes.len() < BW_HEADER_LEN {
                    return Err(WireError::TruncatedPacket {
                        what: "probe header",
                        needed: BW_HEADER_LEN - bytes.len(),
                    });
                }
                let token = u32::from_be_bytes([bytes[2], bytes[3], bytes[4], bytes[5]]);
                let peer_port = u16::from_be_bytes([bytes[6], bytes[7]]);
                let sequence = u32::from_be_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]);
                let send_time_us = u64::from_be_bytes([
                    bytes[12], bytes[13], bytes[14], bytes[15], bytes[16], bytes[17], bytes[18],
                    bytes[19],
                ]);
                let multiplication_factor = bytes[20];
                let base_payload_size =
                    u32::from_be_bytes([bytes[21], bytes[22], bytes[23], bytes[24]]);
                let expected = ProbePacket::expected_payload_len(
                    kind,
                    multiplication_factor,
                    base_payload_size,
                )?;
                let payload = &bytes[BW_HEADER_LEN..];
                if payload.len() != expected {
                    return Err(WireError::FieldSizeMismatch {
                        what: "probe payload",
                        declared: expected,
                        available: payload.len(),
                    });
                }
                Ok(BwPacket::Probe(ProbePacket {
                    kind,
                    token,
                    peer_port,
                    sequence,
                    send_time_us,
                    multiplication_factor,
                    base_payload_size,
                    payload: payload.to_vec(),
                }))
            }
            op => Err(WireError::UnknownOpId {
                protocol: BW_PROTOCOL_ID,
                op,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakthrough_is_eight_bytes() {
        let p = BwPacket::BreakthroughRequest {
            token: 0xCAFE_BABE,
            peer_port: 7100,
        };
        let bytes = p.encode().unwrap();
        assert_eq!(bytes, [0x1E, 0x00, 0xCA, 0xFE, 0xBA, 0xBE, 0x1B, 0xBC]);
        assert_eq!(BwPacket::decode(&bytes).unwrap(), p);
    }

    #[test]
    fn request_wire_size_is_factor_times_base() {
        let p = BwPacket::Probe(ProbePacket {
            kind: ProbeKind::Request,
            token: 1,
            peer_port: 7100,
            sequence: 3,
            send_time_us: 1_000_000,
            multiplication_factor: 2,
            base_payload_size: 64,
            payload: vec![0xAB; 103],
        });
        let bytes = p.encode().unwrap();
        assert_eq!(bytes.len(), 128);
        assert_eq!(BwPacket::decode(&bytes).unwrap(), p);
    }

    #[test]
    fn reply_wire_size_is_base() {
        let p = BwPacket::Probe(ProbePacket {
            kind: ProbeKind::Reply,
            token: 1,
            peer_port: 9,
            sequence: 3,
            send_time_us: 5,
            multiplication_factor: 2,
            base_payload_size: 64,
            payload: vec![0; 39],
        });
        assert_eq!(p.encode().unwrap().len(), 64);
    }

    #[test]
    fn payload_length_rule_enforced_on_decode() {
        let p = BwPacket::Probe(ProbePacket {
            kind: ProbeKind::Request,
            token: 1,
            peer_port: 9,
            sequence: 0,
            send_time_us: 0,
            multiplication_factor: 2,
            base_payload_size: 64,
            payload: vec![0; 103],
        });
        let mut bytes = p.encode().unwrap();
        bytes.pop();
        assert!(matches!(
            BwPacket::decode(&bytes).unwrap_err(),
            WireError::FieldSizeMismatch { .. }
        ));
    }

    #[test]
    fn zero_factor_rejected() {
        let mut bytes = vec![0u8; 64];
        bytes[0] = BW_PROTOCOL_ID;
        bytes[1] = 2;
        bytes[20] = 0; // factor
        bytes[24] = 64; // base
        assert!(matches!(
            BwPacket::decode(&bytes).unwrap_err(),
            WireError::InvalidFieldValue { .. }
        ));
    }
}
