//! Bessel polynomials, their zeros, and Airy-function zeros.

pub mod airy;
pub mod bessel_poly;
pub mod curve;
pub mod zeros;

pub use airy::{airy_zeros, AiryMode, AiryZeros};
pub use bessel_poly::BesselPoly;
pub use zeros::{macdonald_zeros, macdonald_zeros_cached, ZeroSet};
