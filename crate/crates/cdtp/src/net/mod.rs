//! Transport abstraction shared by every protocol endpoint.
//!
//! The server, client, and bandwidth prober are written against these
//! traits only. [`real::RealNet`] backs them with OS sockets and threads;
//! [`crate::simnet::SimNet`] backs them with simulated links driven by a
//! deterministic virtual clock. Protocol code must obtain all time and all
//! blocking through the [`Net`] handle — never `std::time` or
//! `std::thread::sleep` directly — so that a simulated endpoint suspends
//! inside the event loop instead of stalling it.

pub mod pacer;
pub mod real;

use std::net::{Ipv4Addr, SocketAddr};
use std::time::Duration;

use thiserror::Error;

pub type NetResult<T> = Result<T, NetError>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("operation timed out")]
    TimedOut,
    #[error("connection refused")]
    ConnectionRefused,
    #[error("connection reset by peer")]
    ConnectionReset,
    #[error("stream ended")]
    Eof,
    #[error("endpoint closed")]
    Closed,
    #[error("address already in use: port {0}")]
    AddrInUse(u16),
    #[error("host unreachable: {0}")]
    Unreachable(SocketAddr),
    #[error("process killed")]
    Killed,
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for NetError {
    fn from(e: std::io::Error) -> Self {
        use std::io::ErrorKind::*;
        match e.kind() {
            TimedOut | WouldBlock => NetError::TimedOut,
            ConnectionRefused => NetError::ConnectionRefused,
            ConnectionReset | ConnectionAborted | BrokenPipe | NotConnected => {
                NetError::ConnectionReset
            }
            UnexpectedEof => NetError::Eof,
            AddrInUse => NetError::AddrInUse(0),
            _ => NetError::Io(e.to_string()),
        }
    }
}

/// An unreliable datagram endpoint (UDP or its simulated equivalent).
pub trait Datagram: Send + Sync {
    fn send_to(&self, payload: &[u8], dest: SocketAddr) -> NetResult<()>;
    /// Receive one datagram. `None` blocks indefinitely.
    fn recv_from(&self, timeout: Option<Duration>) -> NetResult<(Vec<u8>, SocketAddr)>;
    fn local_addr(&self) -> SocketAddr;
}

/// An ordered reliable byte stream (TCP or its simulated equivalent).
pub trait Stream: Send {
    /// Read up to `buf.len()` bytes; `Ok(0)` means clean end of stream.
    fn read(&mut self, buf: &mut [u8], timeout: Option<Duration>) -> NetResult<usize>;
    fn write_all(&mut self, data: &[u8]) -> NetResult<()>;
    /// Graceful shutdown of the send direction.
    fn close(&mut self);
    /// Hard reset, as an abruptly dying process would cause.
    fn abort(&mut self);
    fn peer_addr(&self) -> SocketAddr;
    fn local_addr(&self) -> SocketAddr;

    /// Fill `buf` completely, applying `timeout` per read.
    fn read_exact_timeout(&mut self, buf: &mut [u8], timeout: Option<Duration>) -> NetResult<()> {
        let mut filled = 0;
        while filled < buf.len() {
            match self.read(&mut buf[filled..], timeout)? {
                0 => return Err(NetError::Eof),
                n => filled += n,
            }
        }
        Ok(())
    }
}

pub trait Listener: Send {
    fn accept(&self, timeout: Option<Duration>) -> NetResult<Box<dyn Stream>>;
    fn local_addr(&self) -> SocketAddr;
}

/// Per-process handle to a network: sockets, clock, sleep, and thread
/// spawning. In the simulator each handle is bound to one simulated node.
pub trait Net: Send + Sync {
    /// Bind a UDP endpoint; port 0 requests an ephemeral port.
    fn bind_udp(&self, port: u16) -> NetResult<Box<dyn Datagram>>;
    fn tcp_listen(&self, port: u16) -> NetResult<Box<dyn Listener>>;
    fn tcp_connect(&self, dest: SocketAddr, timeout: Duration) -> NetResult<Box<dyn Stream>>;
    /// Monotonic time since an arbitrary epoch.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
    /// The address other hosts reach this process at.
    fn local_ip(&self) -> Ipv4Addr;
    /// Spawn a concurrent activity belonging to this process.
    fn spawn(&self, name: &str, f: Box<dyn FnOnce() + Send>);
}

/// Read one envelope-format packet (Query or CT) from a byte stream.
///
/// The envelope is self-delimiting: a 5-byte header declares the field
/// count and each field carries a 4-byte length prefix. `max_field` bounds
/// allocation against corrupt length prefixes.
pub fn read_envelope_packet(
    stream: &mut dyn Stream,
    timeout: Option<Duration>,
    max_field: usize,
) -> NetResult<Vec<u8>> {
    let mut header = [0u8; crate::wire::ENVELOPE_HEADER_LEN];
    stream.read_exact_timeout(&mut header, timeout)?;
    let count = u16::from_be_bytes([header[2], header[3]]) as usize;
    let mut packet = header.to_vec();
    for _ in 0..count {
        let mut len_buf = [0u8; 4];
        stream.read_exact_timeout(&mut len_buf, timeout)?;
        let len = u32::from_be_bytes(len_buf) as usize;
        if len > max_field {
            return Err(NetError::Io(format!(
                "field length {len} exceeds cap {max_field}"
            )));
        }
        let start = packet.len() + 4;
        packet.extend_from_slice(&len_buf);
        packet.resize(start + len, 0);
        stream.read_exact_timeout(&mut packet[start..], timeout)?;
    }
    Ok(packet)
}
