pub mod allocation;
pub mod bound;
pub mod channel;
pub mod cli;
pub mod error;
pub mod special;
pub mod sweep;
pub mod transceiver;
