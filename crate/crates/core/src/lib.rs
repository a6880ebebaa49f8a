//! Hidden momentum of a hydrogen atom in a uniform electric field.
//!
//! A first-order Stark-perturbed bound state is built over the unperturbed
//! basis up to a configurable principal quantum number, and its hidden
//! momentum is evaluated two ways: from the second-order expansion of the
//! relativistic momentum in the center-of-mass frame, and from the quantum
//! analogue of -(1/c²)∫Φ J d³r. Everything is in atomic units.

pub mod basis;
pub mod error;
pub mod hidden;
pub mod numerics;
pub mod operators;
pub mod quadrature;
pub mod stark;
pub mod units;

pub use basis::{QuantumNumbers, Superposition};
pub use error::{Error, Result};
pub use operators::{ElementTable, OperatorKind};
pub use quadrature::Axis;
pub use units::UnitSystem;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
