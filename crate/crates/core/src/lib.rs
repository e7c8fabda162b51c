//! Numerical laboratory for interfaces formed by directional quenching in the
//! Allen-Cahn equation
//!
//! ```text
//! Δu + c_x u_x + c_y u_y + μ(x) u - u^3 + α g(x, u) = 0,   μ = +1 (x < 0), -1 (x > 0)
//! ```
//!
//! and for the contact angle the quenching line selects between the interface and
//! itself.

pub mod config;
pub mod error;
pub mod experiment;
pub mod farfield;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod measure;
pub mod melnikov;
pub mod model;
pub mod poly;
pub mod profiles1d;
pub mod quadrature;
pub mod quench2d;
pub mod spectral;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use field::Field2D;
pub use grid::Grid1D;
pub use model::{EquilibriumBranches, ModelParams};
pub use poly::Poly;
