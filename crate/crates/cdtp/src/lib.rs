//! CDTP: a chain-distributed file transfer protocol.
//!
//! A single server organizes downloading clients into bandwidth-homogeneous
//! chains: the server feeds the head of each chain, and every member relays
//! the file to the member behind it. Clients are grouped by the capacity of
//! the path between them and the server, measured with a four-stage
//! packet-pair probe over UDP.
//!
//! The crate is organized around a transport abstraction ([`net`]) with two
//! implementations: real sockets ([`net::real`]) and a deterministic
//! discrete-event simulator ([`simnet`]). All protocol endpoints —
//! [`server`], [`client`], and the [`bandwidth`] prober — are written
//! against the abstraction and run unmodified on either.

pub mod bandwidth;
pub mod bench;
pub mod client;
pub mod net;
pub mod server;
pub mod simnet;
pub mod wire;
