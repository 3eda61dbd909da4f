//! Holonomic quantum gates from cyclic auxiliary frames.
//!
//! Given a time-parametrized orthonormal frame that closes on itself after a
//! period, this crate assembles the Hamiltonian whose Schrödinger evolution
//! parallel-transports the computational subspace, propagates it, verifies
//! the cyclic-evolution and parallel-transport conditions, and compares the
//! resulting gate against closed forms. A companion geometry module handles
//! paths on the parameter sphere: lengths, enclosed solid angles, and the
//! shortest (circular) path realizing a given rotation angle.
//!
//! The numerics are generic over the floating-point scalar through
//! [`real::Real`]; the `*64` aliases below fix `f64`, which all default
//! tolerances are calibrated for.

pub mod engine;
pub mod frames;
pub mod gates;
pub mod numkit;
pub mod real;
pub mod scenario;
pub mod spherepaths;

pub use numkit::{aligned_distance, gate_distance, ComplexMatrix};
pub use real::Real;

/// Complex scalar at double precision.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix at double precision.
pub type ComplexMatrix64 = numkit::ComplexMatrix<f64>;
/// Parameter-sphere path at double precision.
pub type SpherePath64 = spherepaths::SpherePath<f64>;
/// One-qubit auxiliary frame at double precision.
pub type OneQubitFrame64 = frames::OneQubitFrame<f64>;
/// Two-qubit auxiliary frame at double precision.
pub type TwoQubitFrame64 = frames::TwoQubitFrame<f64>;
/// Uniform time grid at double precision.
pub type TimeGrid64 = engine::TimeGrid<f64>;
/// Rotation-gate description at double precision.
pub type GateSpec64 = gates::GateSpec<f64>;
