//! Query sub-protocol operations (protocol id 10): session management and
//! the FTP-like command subset (ls, pwd, cd, get).

use std::net::Ipv4Addr;

use super::{FieldCursor, PacketEnvelope, WireError, QUERY_PROTOCOL_ID};

/// The eleven Query operations. Field order and sizes follow the protocol
/// appendix exactly; strings are raw bytes with no terminator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryOp {
    /// Op 0. The four ports a client declares when opening a session.
    StartQuerySessionRequest {
        query_port: u16,
        transfer_port: u16,
        control_port: u16,
        bw_peer2_port: u16,
    },
    /// Op 1.
    StartQuerySessionReply { session_handle: u32, success: bool },
    /// Op 2.
    StopQuerySession { session_handle: u32 },
    /// Op 3.
    LsRequest { session_handle: u32 },
    /// Op 4. One variable-size field per file or directory name.
    LsReply {
        session_handle: u32,
        success: bool,
        names: Vec<Vec<u8>>,
    },
    /// Op 5.
    PwdRequest { session_handle: u32 },
    /// Op 6.
    PwdReply {
        session_handle: u32,
        success: bool,
        path: Vec<u8>,
    },
    /// Op 7.
    CdRequest { session_handle: u32, dir: Vec<u8> },
    /// Op 8.
    CdReply { session_handle: u32, success: bool },
    /// Op 9.
    GetRequest {
        session_handle: u32,
        file_name: Vec<u8>,
    },
    /// Op 10. Tells the client where to fetch the file from: the feeder may
    /// be the server itself or the tail client of an existing chain.
    GetReply {
        session_handle: u32,
        success: bool,
        service_ip: Ipv4Addr,
        service_tcp_port: u16,
        service_session_id: u32,
        transfer_session_id: u32,
        file_size: u32,
        link_speed_bps: u32,
    },
}

impl QueryOp {
    pub fn op_id(&self) -> u8 {
        match self {
            QueryOp::StartQuerySessionRequest { .. } => 0,
            QueryOp::StartQuerySessionReply { .. } => 1,
            QueryOp::StopQuerySession { .. } => 2,
            QueryOp::LsRequest { .. } => 3,
            QueryOp::LsReply { .. } => 4,
            QueryOp::PwdRequest { .. } => 5,
            QueryOp::PwdReply { .. } => 6,
            QueryOp::CdRequest { .. } => 7,
            QueryOp::CdReply { .. } => 8,
            QueryOp::GetRequest { .. } => 9,
            QueryOp::GetReply { .. } => 10,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        let mut env = PacketEnvelope::new(QUERY_PROTOCOL_ID, self.op_id(), 0);
        match self {
            QueryOp::StartQuerySessionRequest {
                query_port,
                transfer_port,
                control_port,
                bw_peer2_port,
            } => {
                env.push_u16(*query_port);
                env.push_u16(*transfer_port);
                env.push_u16(*control_port);
                env.push_u16(*bw_peer2_port);
            }
            QueryOp::StartQuerySessionReply {
                session_handle,
                success,
            } => {
                env.push_u32(*session_handle);
                env.push_bool(*success);
            }
            QueryOp::StopQuerySession { session_handle }
            | QueryOp::LsRequest { session_handle }
            | QueryOp::PwdRequest { session_handle } => {
                env.push_u32(*session_handle);
            }
            QueryOp::LsReply {
                session_handle,
                success,
                names,
            } => {
                env.push_u32(*session_handle);
                env.push_bool(*success);
                for name in names {
                    env.push(name.clone());
                }
            }
            QueryOp::PwdReply {
                session_handle,
                success,
                path,
            } => {
                env.push_u32(*session_handle);
                env.push_bool(*success);
                env.push(path.clone());
            }
            QueryOp::CdRequest {
                session_handle,
                dir,
            } => {
                env.push_u32(*session_handle);
                env.push(dir.clone());
            }
            QueryOp::CdReply {
                session_handle,
                success,
            } => {
                env.push_u32(*session_handle);
                env.push_bool(*success);
            }
            QueryOp::GetRequest {
                session_handle,
                file_name,
            } => {
                env.push_u32(*session_handle);
                env.push(file_name.clone());
            }
            QueryOp::GetReply {
                session_handle,
                success,
                service_ip,
                service_tcp_port,
                service_session_id,
                transfer_session_id,
                file_size,
                link_speed_bps,
            } => {
                env.push_u32(*session_handle);
                env.push_bool(*success);
                env.push(service_ip.octets().to_vec());
                env.push_u16(*service_tcp_port);
                env.push_u32(*service_session_id);
                env.push_u32(*transfer_session_id);
                env.push_u32(*file_size);
                env.push_u32(*link_speed_bps);
            }
        }
        env.encode()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let env = PacketEnvelope::decode(bytes, QUERY_PROTOCOL_ID)?;
        match env.op_id {
            0 => {
                let mut c = FieldCursor::new("StartQuerySessionRequest", &env);
                c.expect_count(4)?;
                Ok(QueryOp::StartQuerySessionRequest {
                    query_port: c.u16("query port")?,
                    transfer_port: c.u16("transfer port")?,
                    control_port: c.u16("control port")?,
                    bw_peer2_port: c.u16("bw peer 2 port")?,
                })
            }
            1 => {
                let mut c = FieldCursor::new("StartQuerySessionReply", &env);
                c.expect_count(2)?;
                Ok(QueryOp::StartQuerySessionReply {
                    session_handle: c.u32("session handle")?,
                    success: c.bool("success")?,
                })
            }
            2 => {
                let mut c = FieldCursor::new("StopQuerySession", &env);
                c.expect_count(1)?;
                Ok(QueryOp::StopQuerySession {
                    session_handle: c.u32("session handle")?,
                })
            }
            3 => {
                let mut c = FieldCursor::new("LsRequest", &env);
                c.expect_count(1)?;
                Ok(QueryOp::LsRequest {
                    session_handle: c.u32("session handle")?,
                })
            }
            4 => {
                let mut c = FieldCursor::new("LsReply", &env);
                c.expect_at_least(2)?;
                let session_handle = c.u32("session handle")?;
                let success = c.bool("success")?;
                let mut names = Vec::with_capacity(c.remaining());
                while c.remaining() > 0 {
                    names.push(c.bytes("name")?.to_vec());
                }
                Ok(QueryOp::LsReply {
                    session_handle,
                    success,
                    names,
                })
            }
            5 => {
                let mut c = FieldCursor::new("PwdRequest", &env);
                c.expect_count(1)?;
                Ok(QueryOp::PwdRequest {
                    session_handle: c.u32("session handle")?,
                })
            }
            6 => {
                let mut c = FieldCursor::new("PwdReply", &env);
                c.expect_count(3)?;
                Ok(QueryOp::PwdReply {
                    session_handle: c.u32("session handle")?,
                    success: c.bool("success")?,
                    path: c.bytes("path")?.to_vec(),
                })
            }
            7 => {
                let mut c = FieldCursor::new("CdRequest", &env);
                c.expect_count(2)?;
                Ok(QueryOp::CdRequest {
                    session_handle: c.u32("session handle")?,
                    dir: c.bytes("directory name")?.to_vec(),
                })
            }
            8 => {
                let mut c = FieldCursor::new("CdReply", &env);
                c.expect_count(2)?;
                Ok(QueryOp::CdReply {
                    session_handle: c.u32("session handle")?,
                    success: c.bool("success")?,
                })
            }
            9 => {
                let mut c = FieldCursor::new("GetRequest", &env);
                c.expect_count(2)?;
                Ok(QueryOp::GetRequest {
                    session_handle: c.u32("session handle")?,
                    file_name: c.bytes("file name")?.to_vec(),
                })
            }
            10 => {
                let mut c = FieldCursor::new("GetReply", &env);
                c.expect_count(8)?;
                Ok(QueryOp::GetReply {
                    session_handle: c.u32("session handle")?,
                    success: c.bool("success")?,
                    service_ip: Ipv4Addr::from(c.exact::<4>("service ip")?),
                    service_tcp_port: c.u16("service tcp port")?,
                    service_session_id: c.u32("service session id")?,
                    transfer_session_id: c.u32("transfer session id")?,
                    file_size: c.u32("file size")?,
                    link_speed_bps: c.u32("link speed")?,
                })
            }
            op => Err(WireError::UnknownOpId {
                protocol: QUERY_PROTOCOL_ID,
                op,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_query_session_matches_hand_assembled_bytes() {
        let op = QueryOp::StopQuerySession { session_handle: 1 };
        let bytes = op.encode().unwrap();
        let expected = [
            0x0A, 0x02, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00, 0x01,
        ];
        assert_eq!(bytes, expected);
        assert_eq!(QueryOp::decode(&expected).unwrap(), op);
    }

    #[test]
    fn ls_reply_with_zero_names_is_legal() {
        let op = QueryOp::LsReply {
            session_handle: 9,
            success: true,
            names: vec![],
        };
        let bytes = op.encode().unwrap();
        assert_eq!(QueryOp::decode(&bytes).unwrap(), op);
    }

    #[test]
    fn session_handle_must_be_exactly_four_bytes() {
        // LsRequest with a 3-byte handle field
        let mut env = PacketEnvelope::new(QUERY_PROTOCOL_ID, 3, 0);
        env.push(vec![0, 0, 1]);
        let bytes = env.encode().unwrap();
        let err = QueryOp::decode(&bytes).unwrap_err();
        assert!(matches!(
            err,
            WireError::FieldSizeMismatch {
                declared: 4,
                available: 3,
                ..
            }
        ));
    }

    #[test]
    fn unknown_op_reported() {
        let env = PacketEnvelope::new(QUERY_PROTOCOL_ID, 11, 0);
        let bytes = env.encode().unwrap();
        assert_eq!(
            QueryOp::decode(&bytes).unwrap_err(),
            WireError::UnknownOpId {
                protocol: QUERY_PROTOCOL_ID,
                op: 11
            }
        );
    }

    #[test]
    fn nonzero_success_byte_decodes_as_true() {
        let mut env = PacketEnvelope::new(QUERY_PROTOCOL_ID, 8, 0);
        env.push_u32(7);
        env.push_u8(0x5A);
        let bytes = env.encode().unwrap();
        assert_eq!(
            QueryOp::decode(&bytes).unwrap(),
            QueryOp::CdReply {
                session_handle: 7,
                success: true
            }
        );
    }
}
