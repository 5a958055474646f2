//! Well-conditioned evaluation of the kernel on the imaginary axis.

pub mod gk;
pub mod omega;
pub mod profile;

pub use omega::omega_cf;
pub use profile::{
    omega_profile, phi_far, phi_truth, phi_truth_profile, phi_via_decades, phi_via_integral,
    GridSpec, KernelSampleSet, PhiValue, QuadratureSpec, Spacing,
};
