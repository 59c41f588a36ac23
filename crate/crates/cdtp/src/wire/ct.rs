//! Control&Transfer sub-protocol operations (protocol id 20): the transfer
//! dialog between a client and its feeder, plus the UDP control commands a
//! client sends to the server (progress, retransmission, disengage).

use std::net::Ipv4Addr;

use super::{FieldCursor, PacketEnvelope, WireError, CT_PROTOCOL_ID};

/// Why a feeder refused (or stopped) serving a transfer request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum DenyReason {
    IncompatibleLinkSpeed = 1,
    BadServiceSessionId = 2,
    AlreadyServing = 3,
    GoingDown = 4,
    ChunkSizeTooBig = 5,
    Internal = 6,
}

impl DenyReason {
    pub fn from_u8(v: u8) -> Result<Self, WireError> {
        match v {
            1 => Ok(DenyReason::IncompatibleLinkSpeed),
            2 => Ok(DenyReason::BadServiceSessionId),
            3 => Ok(DenyReason::AlreadyServing),
            4 => Ok(DenyReason::GoingDown),
            5 => Ok(DenyReason::ChunkSizeTooBig),
            6 => Ok(DenyReason::Internal),
            other => Err(WireError::InvalidFieldValue {
                what: "denial reason",
                value: other as u64,
            }),
        }
    }
}

/// The seven CT operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CtOp {
    /// Op 0, over TCP. First packet after the transfer stream is opened.
    StartTransferRequest {
        service_session_id: u32,
        transfer_session_id: u32,
        start_position: u32,
        chunk_size: u32,
        requested_link_speed_bps: u32,
        bw_peer2_port: u16,
    },
    /// Op 1, over TCP. `data` always has the negotiated chunk size; the
    /// tail beyond `actual_chunk_size` is zero padding.
    TransferReply {
        transfer_session_id: u32,
        actual_chunk_size: u32,
        is_last: bool,
        chunk_number: u32,
        data: Vec<u8>,
    },
    /// Op 2, over TCP.
    TransferDenied {
        transfer_session_id: u32,
        reason: DenyReason,
    },
    /// Op 3, over UDP to the server.
    RetransmissionRequest {
        transfer_session_id: u32,
        size_received: u32,
        service_client_occupied: bool,
    },
    /// Op 4, over UDP from the server.
    RetransmissionReply {
        transfer_session_id: u32,
        success: bool,
        alt_ip: Ipv4Addr,
        alt_port: u16,
        new_service_session_id: u32,
    },
    /// Op 5, over UDP to the server.
    ProgressReport {
        transfer_session_id: u32,
        bytes_received: u32,
    },
    /// Op 6, over UDP to the server.
    DisengageCommand {
        transfer_session_id: u32,
        bytes_received: u32,
        service_client_occupied: bool,
    },
}

impl CtOp {
    pub fn op_id(&self) -> u8 {
        match self {
            CtOp::StartTransferRequest { .. } => 0,
            CtOp::TransferReply { .. } => 1,
            CtOp::TransferDenied { .. } => 2,
            CtOp::RetransmissionRequest { .. } => 3,
            CtOp::RetransmissionReply { .. } => 4,
            CtOp::ProgressReport { .. } => 5,
            CtOp::DisengageCommand { .. } => 6,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        // Payload indication is 1 only for the operation that carries bulk
        // data after the control fields.
        let payload_flag = u8::from(matches!(self, CtOp::TransferReply { .. }));
        let mut env = PacketEnvelope::new(CT_PROTOCOL_ID, self.op_id(), payload_flag);
        match self {
            CtOp::StartTransferRequest {
                service_session_id,
                transfer_session_id,
                start_position,
                chunk_size,
                requested_link_speed_bps,
                bw_peer2_port,
            } => {
                env.push_u32(*service_session_id);
                env.push_u32(*transfer_session_id);
                env.push_u32(*start_position);
                env.push_u32(*chunk_size);
                env.push_u32(*requested_link_speed_bps);
                env.push_u16(*bw_peer2_port);
            }
            CtOp::TransferReply {
                transfer_session_id,
                actual_chunk_size,
                is_last,
                chunk_number,
                data,
            } => {
                if *actual_chunk_size as usize > data.len() {
                    return Err(WireError::InvalidFieldValue {
                        what: "actual chunk size beyond data length",
                        value: *actual_chunk_size as u64,
                    });
                }
                env.push_u32(*transfer_session_id);
                env.push_u32(*actual_chunk_size);
                env.push_bool(*is_last);
                env.push_u32(*chunk_number);
                env.push(data.clone());
            }
            CtOp::TransferDenied {
                transfer_session_id,
                reason,
            } => {
                env.push_u32(*transfer_session_id);
                env.push_u8(*reason as u8);
            }
            CtOp::RetransmissionRequest {
                transfer_session_id,
                size_received,
                service_client_occupied,
            } => {
                env.push_u32(*transfer_session_id);
                env.push_u32(*size_received);
                env.push_bool(*service_client_occupied);
            }
            CtOp::RetransmissionReply {
                transfer_session_id,
                success,
                alt_ip,
                alt_port,
                new_service_session_id,
            } => {
                env.push_u32(*transfer_session_id);
                env.push_bool(*success);
                env.push(alt_ip.octets().to_vec());
                env.push_u16(*alt_port);
                env.push_u32(*new_service_session_id);
            }
            CtOp::ProgressReport {
                transfer_session_id,
                bytes_received,
            } => {
                env.push_u32(*transfer_session_id);
                env.push_u32(*bytes_received);
            }
            CtOp::DisengageCommand {
                transfer_session_id,
                bytes_received,
                service_client_occupied,
            } => {
                env.push_u32(*transfer_session_id);
                env.push_u32(*bytes_received);
                env.push_bool(*service_client_occupied);
            }
        }
        env.encode()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let env = PacketEnvelope::decode(bytes, CT_PROTOCOL_ID)?;
        match env.op_id {
            0 => {
                let mut c = FieldCursor::new("StartTransferRequest", &env);
                c.expect_count(6)?;
                Ok(CtOp::StartTransferRequest {
                    service_session_id: c.u32("service session id")?,
                    transfer_session_id: c.u32("transfer session id")?,
                    start_position: c.u32("start position")?,
                    chunk_size: c.u32("chunk size")?,
                    requested_link_speed_bps: c.u32("requested link speed")?,
                    bw_peer2_port: c.u16("bw peer 2 port")?,
                })
            }
            1 => {
                let mut c = FieldCursor::new("TransferReply", &env);
                c.expect_count(5)?;
                let transfer_session_id = c.u32("transfer session id")?;
                let actual_chunk_size = c.u32("actual chunk size")?;
                let is_last = c.bool("is last")?;
                let chunk_number = c.u32("chunk number")?;
                let data = c.bytes("data chunk")?.to_vec();
                if actual_chunk_size as usize > data.len() {
                    return Err(WireError::InvalidFieldValue {
                        what: "actual chunk size beyond data length",
                        value: actual_chunk_size as u64,
                    });
                }
                Ok(CtOp::TransferReply {
                    transfer_session_id,
                    actual_chunk_size,
                    is_last,
                    chunk_number,
                    data,
                })
            }
            2 => {
                let mut c = FieldCursor::new("TransferDenied", &env);
                c.expect_count(2)?;
                Ok(CtOp::TransferDenied {
                    transfer_session_id: c.u32("transfer session id")?,
                    reason: DenyReason::from_u8(c.u8("denial reason")?)?,
                })
            }
            3 => {
                let mut c = FieldCursor::new("RetransmissionRequest", &env);
                c.expect_count(3)?;
                Ok(CtOp::RetransmissionRequest {
                    transfer_session_id: c.u32("transfer session id")?,
                    size_received: c.u32("size received")?,
                    service_client_occupied: c.bool("service client occupied")?,
                })
            }
            4 => {
                let mut c = FieldCursor::new("RetransmissionReply", &env);
                c.expect_count(5)?;
                Ok(CtOp::RetransmissionReply {
                    transfer_session_id: c.u32("transfer session id")?,
                    success: c.bool("success")?,
                    alt_ip: Ipv4Addr::from(c.exact::<4>("alternate ip")?),
                    alt_port: c.u16("alternate port")?,
                    new_service_session_id: c.u32("new service session id")?,
                })
            }
            5 => {
                let mut c = FieldCursor::new("ProgressReport", &env);
                c.expect_count(2)?;
                Ok(CtOp::ProgressReport {
                    transfer_session_id: c.u32("transfer session id")?,
                    bytes_received: c.u32("bytes received")?,
                })
            }
            6 => {
                let mut c = FieldCursor::new("DisengageCommand", &env);
                c.expect_count(3)?;
                Ok(CtOp::DisengageCommand {
                    transfer_session_id: c.u32("transfer session id")?,
                    bytes_received: c.u32("bytes received")?,
                    service_client_occupied: c.bool("service client occupied")?,
                })
            }
            op => Err(WireError::UnknownOpId {
                protocol: CT_PROTOCOL_ID,
                op,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_reply_sets_payload_flag() {
        let op = CtOp::TransferReply {
            transfer_session_id: 5,
            actual_chunk_size: 3,
            is_last: true,
            chunk_number: 68,
            data: vec![b'a', b'b', b'c', 0, 0, 0, 0, 0],
        };
        let bytes = op.encode().unwrap();
        assert_eq!(bytes[4], 1, "payload indication byte");
        assert_eq!(CtOp::decode(&bytes).unwrap(), op);
    }

    #[test]
    fn control_ops_clear_payload_flag() {
        let op = CtOp::ProgressReport {
            transfer_session_id: 7,
            bytes_received: 4226,
        };
        let bytes = op.encode().unwrap();
        assert_eq!(bytes[4], 0);
    }

    #[test]
    fn actual_chunk_size_cannot_exceed_data() {
        let op = CtOp::TransferReply {
            transfer_session_id: 1,
            actual_chunk_size: 9,
            is_last: false,
            chunk_number: 0,
            data: vec![0; 8],
        };
        assert!(op.encode().is_err());
    }

    #[test]
    fn denial_reason_range_enforced() {
        let mut env = PacketEnvelope::new(CT_PROTOCOL_ID, 2, 0);
        env.push_u32(1);
        env.push_u8(7);
        let err = CtOp::decode(&env.encode().unwrap()).unwrap_err();
        assert!(matches!(err, WireError::InvalidFieldValue { .. }));
    }

    #[test]
    fn decoders_accept_but_ignore_payload_flag() {
        let op = CtOp::ProgressReport {
            transfer_session_id: 7,
            bytes_received: 10,
        };
        let mut bytes = op.encode().unwrap();
        bytes[4] = 1;
        assert_eq!(CtOp::decode(&bytes).unwrap(), op);
    }
}
