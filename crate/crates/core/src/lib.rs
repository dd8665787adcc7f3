//! Pseudo-spectral simulation and diagnostics for the family of 2D
//! regularized incompressible MHD systems
//!
//! ```text
//! ∂ₜv + (u·∇)v + (-Δ)^α L² v + Σⱼ vⱼ∇uⱼ + ∇(p + ½|b|²) = (b·∇)b
//! ∂ₜb + (u·∇)b + (-Δ)^β b = (b·∇)u
//! v = u + (-Δ)^γ L² u,    ∇·u = ∇·v = ∇·b = 0
//! ```
//!
//! on the 2π-periodic torus, where `L` is the logarithmic multiplier `1/g(|ξ|)`.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod harness;
pub mod spectral;
pub mod timestepper;

pub use dynamics::{SimState, SystemConfig, SystemVariant};
pub use error::{Error, Result};
pub use fields::{SpectralVector, Vorticity};
pub use spectral::{make_grid, Grid, LogSymbol, SpectralScalar, SymbolSpec};
pub use timestepper::{run, step, RunReport, Scheme, StepperConfig};
pub use diagnostics::{DiagnosticSink, DiagnosticsRecord};
pub use harness::{RunSpec, InitialData};
