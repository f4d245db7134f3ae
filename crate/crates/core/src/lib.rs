//! Bit-accurate differential simulation of hardware-trojaned digital designs.
//!
//! Four small designs (an 8-bit dual edge detector, a 32-bit Galois LFSR, a
//! PS/2 mouse packet decoder, and a UART-style serial receiver) are each
//! modeled twice: a golden reference and a variant carrying a hidden
//! trigger/payload modification. A lockstep harness replays deterministic
//! seeded stimulus through both instances and tallies where they disagree,
//! which is how the error-rate experiments in [`presets`] are produced.

pub mod bits;
pub mod config;
pub mod designs;
mod error;
pub mod harness;
pub mod presets;
pub mod report;
pub mod stimulus;
pub mod trojan;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
