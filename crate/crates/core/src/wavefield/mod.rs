//! Explicit approximate solution of the three-body problem and its discrepancy.

pub mod field;
pub mod fresnel;

pub use field::{smoothstep, AnomalousAmplitudes, Cutoff, FieldModel, FieldSpec, RayTerm};
pub use fresnel::{delta_phi, phi, phi_prime};
