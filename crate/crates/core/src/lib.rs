//! Non-binary polar codes over GF(2^p) with 2×2 kernels.
//!
//! The crate covers field arithmetic, (generalized) code description and
//! encoding, the AWGN/BPSK channel front end, log-domain SC decoding, fast
//! special-node decoding, Monte-Carlo construction, a latency model and a
//! simulation harness.

pub mod channel;
pub mod code;
pub mod config;
pub mod construction;
pub mod fastnodes;
pub mod gf;
pub mod latency;
pub mod lnbsc;
pub mod presets;
pub mod sim;

pub use code::{CodeError, CodeSpec, Kernel, KernelTable, NodeId};
pub use gf::{FieldSpec, GfError, PermMap, Symbol};
