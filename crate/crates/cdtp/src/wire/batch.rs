//! Batch sub-protocol packets (protocol id 40): remote control of client
//! get operations. Every packet is exactly three bytes.

use super::{WireError, BATCH_PROTOCOL_ID};

const BATCH_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchPacket {
    /// Op 0, controller -> client. Data byte is always 0.
    BeginRequest,
    /// Op 1, client -> controller: whether the get operation began.
    BeginReply { ok: bool },
    /// Op 2, client -> controller: whether the get operation succeeded.
    BeginResult { ok: bool },
}

impl BatchPacket {
    pub fn encode(&self) -> Vec<u8> {
        let (op, data) = match self {
            BatchPacket::BeginRequest => (0, 0),
            BatchPacket::BeginReply { ok } => (1, u8::from(*ok)),
            BatchPacket::BeginResult { ok } => (2, u8::from(*ok)),
        };
        vec![BATCH_PROTOCOL_ID, op, data]
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() < BATCH_LEN {
            return Err(WireError::TruncatedPacket {
                what: "batch packet",
                needed: BATCH_LEN - bytes.len(),
            });
        }
        if bytes[0] != BATCH_PROTOCOL_ID {
            return Err(WireError::ProtocolIdMismatch {
                expected: BATCH_PROTOCOL_ID,
                found: bytes[0],
            });
        }
        if bytes.len() > BATCH_LEN {
            return Err(WireError::TrailingBytes {
                count: bytes.len() - BATCH_LEN,
            });
        }
        match bytes[1] {
            0 => Ok(BatchPacket::BeginRequest),
            1 => Ok(BatchPacket::BeginReply { ok: bytes[2] != 0 }),
            2 => Ok(BatchPacket::BeginResult { ok: bytes[2] != 0 }),
            op => Err(WireError::UnknownOpId {
                protocol: BATCH_PROTOCOL_ID,
                op,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn begin_request_matches_hand_assembled_bytes() {
        assert_eq!(BatchPacket::BeginRequest.encode(), [0x28, 0x00, 0x00]);
        assert_eq!(
            BatchPacket::decode(&[0x28, 0x00, 0x00]).unwrap(),
            BatchPacket::BeginRequest
        );
    }

    #[test]
    fn exactly_three_bytes() {
        assert!(BatchPacket::decode(&[0x28, 0x01]).is_err());
        assert!(BatchPacket::decode(&[0x28, 0x01, 0x01, 0x00]).is_err());
    }
}
