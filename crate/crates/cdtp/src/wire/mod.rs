//! Bit-exact encode/decode of the four CDTP sub-protocol packet formats.
//!
//! Two of the sub-protocols (Query, Control&Transfer) share a common
//! envelope: a 5-byte header followed by a list of length-prefixed fields.
//! The Bandwidth and Batch sub-protocols use their own fixed layouts.
//!
//! Envelope layout:
//!
//! ```text
//! byte 0      protocol id (10 = Query, 20 = CT)
//! byte 1      operation id
//! bytes 2-3   number of fields (big-endian)
//! byte 4      payload indication
//! rest        fields, each: 4-byte big-endian data length, then data
//! ```
//!
//! All multi-byte integers are big-endian. Decoding arbitrary bytes never
//! panics and never allocates beyond the input length; every failure is a
//! [`WireError`].

mod batch;
mod bw;
mod ct;
mod query;

pub use batch::BatchPacket;
pub use bw::{BwPacket, ProbeKind, ProbePacket, BW_HEADER_LEN};
pub use ct::{CtOp, DenyReason};
pub use query::QueryOp;

use thiserror::Error;

/// Protocol id carried in byte 0 of every Query packet.
pub const QUERY_PROTOCOL_ID: u8 = 10;
/// Protocol id carried in byte 0 of every Control&Transfer packet.
pub const CT_PROTOCOL_ID: u8 = 20;
/// Protocol id carried in byte 0 of every Bandwidth packet.
pub const BW_PROTOCOL_ID: u8 = 30;
/// Protocol id carried in byte 0 of every Batch packet.
pub const BATCH_PROTOCOL_ID: u8 = 40;

/// Envelope header length: protocol id, op id, field count, payload flag.
pub const ENVELOPE_HEADER_LEN: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    /// Input ended before the declared structure was complete.
    #[error("truncated packet: need {needed} more byte(s) for {what}")]
    TruncatedPacket { what: &'static str, needed: usize },
    /// The operation id is not defined for this protocol.
    #[error("unknown op id {op} for protocol {protocol}")]
    UnknownOpId { protocol: u8, op: u8 },
    /// Byte 0 does not match the protocol the caller expected.
    #[error("protocol id mismatch: expected {expected}, found {found}")]
    ProtocolIdMismatch { expected: u8, found: u8 },
    /// A declared field length exceeds the remaining bytes, or a field does
    /// not have the exact size the operation declares for it.
    #[error("field size mismatch for {what}: declared {declared}, available {available}")]
    FieldSizeMismatch {
        what: &'static str,
        declared: usize,
        available: usize,
    },
    /// The field count does not match what the operation requires.
    #[error("{op}: expected {expected} field(s), found {found}")]
    FieldCountMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    /// A field value is outside its legal range (e.g. a denial reason of 0).
    #[error("invalid value for {what}: {value}")]
    InvalidFieldValue { what: &'static str, value: u64 },
    /// Bytes remain after the declared structure was fully parsed.
    #[error("{count} trailing byte(s) after packet end")]
    TrailingBytes { count: usize },
    /// A field or packet exceeds what its length prefix can express.
    #[error("oversized {what}: {len} bytes")]
    Oversized { what: &'static str, len: usize },
}

/// One length-prefixed field of an envelope packet. The on-wire length is
/// always exactly `data.len()`; it is not stored separately.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field(pub Vec<u8>);

impl Field {
    pub fn data(&self) -> &[u8] {
        &self.0
    }
}

/// The shared length-prefixed packet structure of the Query and CT
/// sub-protocols. Re-encoding a decoded envelope reproduces the original
/// byte string exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketEnvelope {
    pub protocol_id: u8,
    pub op_id: u8,
    pub payload_flag: u8,
    pub fields: Vec<Field>,
}

impl PacketEnvelope {
    pub fn new(protocol_id: u8, op_id: u8, payload_flag: u8) -> Self {
        PacketEnvelope {
            protocol_id,
            op_id,
            payload_flag,
            fields: Vec::new(),
        }
    }

    pub fn push(&mut self, data: Vec<u8>) {
        self.fields.push(Field(data));
    }

    pub fn push_u8(&mut self, v: u8) {
        self.push(vec![v]);
    }

    pub fn push_u16(&mut self, v: u16) {
        self.push(v.to_be_bytes().to_vec());
    }

    pub fn push_u32(&mut self, v: u32) {
        self.push(v.to_be_bytes().to_vec());
    }

    pub fn push_bool(&mut self, v: bool) {
        self.push_u8(u8::from(v));
    }

    /// Serialize to the exact on-wire byte string.
    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        let count = u16::try_from(self.fields.len()).map_err(|_| WireError::Oversized {
            what: "field count",
            len: self.fields.len(),
        })?;
        let mut total = ENVELOPE_HEADER_LEN;
        for f in &self.fields {
            if u32::try_from(f.0.len()).is_err() {
                return Err(WireError::Oversized {
                    what: "field",
                    len: f.0.len(),
                });
            }
            total += 4 + f.0.len();
        }
        let mut buf = Vec::with_capacity(total);
        buf.push(self.protocol_id);
        buf.push(self.op_id);
        buf.extend_from_slice(&count.to_be_bytes());
        buf.push(self.payload_flag);
        for f in &self.fields {
            buf.extend_from_slice(&(f.0.len() as u32).to_be_bytes());
            buf.extend_from_slice(&f.0);
        }
        Ok(buf)
    }

    /// Parse an envelope, verifying the protocol id and consuming the whole
    /// input. Allocation is bounded by the input length.
    pub fn decode(bytes: &[u8], expected_protocol: u8) -> Result<Self, WireError> {
        if bytes.len() < ENVELOPE_HEADER_LEN {
            return Err(WireError::TruncatedPacket {
                what: "envelope header",
                needed: ENVELOPE_HEADER_LEN - bytes.len(),
            });
        }
        let protocol_id = bytes[0];
        if protocol_id != expected_protocol {
            return Err(WireError::ProtocolIdMismatch {
                expected: expected_protocol,
                found: protocol_id,
            });
        }
        let op_id = bytes[1];
        let count = u16::from_be_bytes([bytes[2], bytes[3]]) as usize;
        let payload_flag = bytes[4];
        let mut rest = &bytes[ENVELOPE_HEADER_LEN..];
        let mut fields = Vec::with_capacity(count.min(rest.len() / 4 + 1));
        for _ in 0..count {
            if rest.len() < 4 {
                return Err(WireError::TruncatedPacket {
                    what: "field length prefix",
                    needed: 4 - rest.len(),
                });
            }
            let len = u32::from_be_bytes([rest[0], rest[1], rest[2], rest[3]]) as usize;
            rest = &rest[4..];
            if rest.len() < len {
                return Err(WireError::FieldSizeMismatch {
                    what: "field data",
                    declared: len,
                    available: rest.len(),
                });
            }
            fields.push(Field(rest[..len].to_vec()));
            rest = &rest[len..];
        }
        if !rest.is_empty() {
            return Err(WireError::TrailingBytes { count: rest.len() });
        }
        Ok(PacketEnvelope {
            protocol_id,
            op_id,
            payload_flag,
            fields,
        })
    }
}

/// Typed accessors over a decoded envelope's field list, enforcing the
/// per-operation field sizes of the protocol appendix.
pub(crate) struct FieldCursor<'a> {
    op: &'static str,
    fields: &'a [Field],
    index: usize,
}

impl<'a> FieldCursor<'a> {
    pub fn new(op: &'static str, env: &'a PacketEnvelope) -> Self {
        FieldCursor {
            op,
            fields: &env.fields,
            index: 0,
        }
    }

    pub fn expect_count(&self, expected: usize) -> Result<(), WireError> {
        if self.fields.len() != expected {
            return Err(WireError::FieldCountMismatch {
                op: self.op,
                expected,
                found: self.fields.len(),
            });
        }
        Ok(())
    }

    pub fn expect_at_least(&self, expected: usize) -> Result<(), WireError> {
        if self.fields.len() < expected {
            return Err(WireError::FieldCountMismatch {
                op: self.op,
                expected,
                found: self.fields.len(),
            });
        }
        Ok(())
    }

    pub fn remaining(&self) -> usize {
        self.fields.len() - self.index
    }

    pub fn bytes(&mut self, what: &'static str) -> Result<&'a [u8], WireError> {
        let f = self.fields.get(self.index).ok_or(WireError::FieldCountMismatch {
            op: self.op,
            expected: self.index + 1,
            found: self.fields.len(),
        })?;
        self.index += 1;
        let _ = what;
        Ok(&f.0)
    }

    pub fn exact<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N], WireError> {
        let data = self.bytes(what)?;
        <[u8; N]>::try_from(data).map_err(|_| WireError::FieldSizeMismatch {
            what,
            declared: N,
            available: data.len(),
        })
    }

    pub fn u8(&mut self, what: &'static str) -> Result<u8, WireError> {
        Ok(self.exact::<1>(what)?[0])
    }

    pub fn u16(&mut self, what: &'static str) -> Result<u16, WireError> {
        Ok(u16::from_be_bytes(self.exact::<2>(what)?))
    }

    pub fn u32(&mut self, what: &'static str) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.exact::<4>(what)?))
    }

    /// Booleans on the wire: 0 is false, anything else is treated as true.
    pub fn bool(&mut self, what: &'static str) -> Result<bool, WireError> {
        Ok(self.u8(what)? != 0)
    }
}

/// Which typed packet a control datagram carries. The server's UDP control
/// port receives both Query and CT operations; byte 0 disambiguates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlOp {
    Query(QueryOp),
    Ct(CtOp),
}

/// Decode a datagram that may be either a Query or a CT control packet.
pub fn decode_control(bytes: &[u8]) -> Result<ControlOp, WireError> {
    match bytes.first() {
        Some(&QUERY_PROTOCOL_ID) => Ok(ControlOp::Query(QueryOp::decode(bytes)?)),
        Some(&CT_PROTOCOL_ID) => Ok(ControlOp::Ct(CtOp::decode(bytes)?)),
        Some(&other) => Err(WireError::ProtocolIdMismatch {
            expected: QUERY_PROTOCOL_ID,
            found: other,
        }),
        None => Err(WireError::TruncatedPacket {
            what: "protocol id",
            needed: 1,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_roundtrip_preserves_bytes() {
        let mut env = PacketEnvelope::new(QUERY_PROTOCOL_ID, 2, 0);
        env.push_u32(1);
        let bytes = env.encode().unwrap();
        let back = PacketEnvelope::decode(&bytes, QUERY_PROTOCOL_ID).unwrap();
        assert_eq!(back, env);
        assert_eq!(back.encode().unwrap(), bytes);
    }

    #[test]
    fn short_input_is_truncated() {
        let err = PacketEnvelope::decode(&[10, 2], 10).unwrap_err();
        assert!(matches!(err, WireError::TruncatedPacket { .. }));
    }

    #[test]
    fn declared_length_beyond_input_is_field_size_mismatch() {
        // header + one field claiming 200 bytes but carrying 1
        let mut bytes = vec![10, 2, 0, 1, 0];
        bytes.extend_from_slice(&200u32.to_be_bytes());
        bytes.push(0xAA);
        let err = PacketEnvelope::decode(&bytes, 10).unwrap_err();
        assert!(matches!(
            err,
            WireError::FieldSizeMismatch {
                declared: 200,
                available: 1,
                ..
            }
        ));
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut env = PacketEnvelope::new(QUERY_PROTOCOL_ID, 2, 0);
        env.push_u32(1);
        let mut bytes = env.encode().unwrap();
        bytes.push(0xFF);
        let err = PacketEnvelope::decode(&bytes, QUERY_PROTOCOL_ID).unwrap_err();
        assert_eq!(err, WireError::TrailingBytes { count: 1 });
    }

    #[test]
    fn wrong_protocol_rejected() {
        let mut env = PacketEnvelope::new(QUERY_PROTOCOL_ID, 2, 0);
        env.push_u32(1);
        let bytes = env.encode().unwrap();
        let err = PacketEnvelope::decode(&bytes, CT_PROTOCOL_ID).unwrap_err();
        assert!(matches!(err, WireError::ProtocolIdMismatch { .. }));
    }
}
