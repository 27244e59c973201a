//! Pricing engine for path-dependent options under exponential Levy models.
//!
//! The core pipeline: model cumulants with analytic extension to a complex
//! strip, Wiener-Hopf ladder factors computed from transition laws, Laplace
//! inversion for the distribution of the running supremum, and damped Fourier
//! pricing of lookback, touch and default-swap style contracts. Monte Carlo
//! and Brownian closed forms serve as independent cross-checks.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod inversion;
pub mod models;
pub mod oracle;
pub mod pricing;
pub mod quad;
pub mod special;
pub mod transition;
pub mod wienerhopf;

pub use error::{EngineError, Result};
pub use models::{Family, LevyModel, MomentStrip, PathFlags};

/// Entry point for the command-line binary; returns the process exit code.
pub fn run_cli() -> i32 {
    cli::main()
}
