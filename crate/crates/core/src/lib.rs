//! Integral quantization of phase-space functions from resolutions of the
//! identity: Weyl–Heisenberg (truncated Fock space), affine (half-line), and
//! coherent states on the sphere.

pub mod affine;
pub mod berezin;
pub mod error;
pub mod export;
pub mod fock;
pub mod quadrature;
pub mod special;
pub mod sphere;
pub mod verify;
pub mod weyl;

pub use error::{QuantError, Result};
pub use fock::{
    DensityOperator, DisplacementMethod, FockOperator, StateVector, Tolerances, TruncatedFockSpace,
};
pub use quadrature::{AngularRule, PhasePoint, PhaseSpaceQuadrature, QuadNode};
pub use weyl::{WeightFunction, WhQuantizer};
