pub mod dense;
pub mod fidelity;
pub mod parity;
pub mod uncompute;
pub mod altvk;
