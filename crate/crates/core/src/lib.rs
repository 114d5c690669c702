//! Optimal mass transport on the model Alexandrov surfaces (plane, round
//! sphere, Euclidean cone) with numerical verification that optimal plans
//! concentrate on the graph of `x ↦ exp_x(−∇ψ(x))` for a c-concave `ψ`.

pub mod comparison;
pub mod costs;
pub mod duality;
pub mod error;
pub mod instance;
pub mod monge;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};
pub use spaces::{Chart, Geodesic, Logarithm, Point, Region, Space, TangentVector};
