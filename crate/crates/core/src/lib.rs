//! Scattering theory and dispersive kernels for the one-dimensional
//! Schrödinger operator 𝓗 = −∂²_ξ + V(ξ) induced by a surface of
//! revolution with conical ends.
//!
//! The pipeline runs profile → arclength chart → potential → Jost
//! solutions and low-energy basis → Wronskian and scattering coefficients →
//! spectral density → weighted Schrödinger and wave kernels.
//!
//! Runnable examples (one per capability):
//!
//! ```text
//! cargo run -p conic-scatter --release --example profile_potential
//! cargo run -p conic-scatter --release --example hankel_reference
//! cargo run -p conic-scatter --release --example volterra_solve
//! cargo run -p conic-scatter --release --example jost_wronskian
//! cargo run -p conic-scatter --release --example low_energy_constants
//! cargo run -p conic-scatter --release --example kernel_decay
//! cargo run -p conic-scatter --release --example stationary_phase
//! ```

pub mod cli;
pub mod config;
pub mod geometry;
pub mod hankel;
pub mod jost;
pub mod kernel;
pub mod ode;
pub mod quad;
pub mod volterra;

pub use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("not conical: {0}")]
    NotConical(String),
    #[error("volterra: {0}")]
    Volterra(String),
    #[error("quadrature: {0}")]
    Quadrature(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
