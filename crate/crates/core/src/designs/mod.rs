//! Golden and trojan-carrying models of the four simulated designs.

pub mod edge;
pub mod lfsr;
pub mod mouse;
pub mod uart;
