//! Collusion-resistant secure key leasing over a sparse statevector
//! simulator.

pub mod bits;
pub mod cr2;
pub mod error;
pub mod feskl;
pub mod games;
pub mod gf2;
pub mod pkecrskl;
pub mod policy;
pub mod prims;
pub mod qreg;
pub mod signed;
pub mod skecd;
pub mod skecrskl;

pub use bits::Bits;
pub use error::{Error, Result};
