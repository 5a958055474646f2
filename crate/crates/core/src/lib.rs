//! Teleportation kernels for multipoles of the radial wave equation.
//!
//! The crate builds the exact frequency-domain kernel that maps a signal
//! recorded at radius `r1` to the signal arriving at `r2` (possibly
//! infinity), compresses it into a short sum of exponentials, stores it as
//! a pole/residue table and applies it to sampled time series.

pub mod compress;
pub mod error;
pub mod eval;
pub mod exact;
pub mod experiments;
pub mod io;
pub mod par;
pub mod precision;
pub mod special;
pub mod table;
pub mod teleport;
pub mod wave;

pub use error::{Error, Result};
