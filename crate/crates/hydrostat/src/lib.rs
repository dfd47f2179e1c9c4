//! Finite-volume solver for the dimensionless compressible Euler equations
//! with a gravitational source term.
//!
//! The solver is built around a two-speed Suliciu-type relaxation Riemann
//! solver whose closure is chosen so that discrete hydrostatic equilibria
//! are preserved exactly (well-balancing), and whose acoustic relaxation
//! speeds are rescaled at low Mach numbers so that the numerical diffusion
//! stays bounded as the Mach number goes to zero (asymptotic preserving).
//!
//! Layout:
//! - [`eos`]: ideal-gas thermodynamics and conserved/primitive conversions,
//! - [`riemann`]: the per-face relaxation solver (speeds, intermediate
//!   states, flux and source halves),
//! - [`grid`]: Cartesian grid, field storage, ghost cells and boundaries,
//! - [`recon`]: positivity-limited MUSCL reconstruction in primitives with
//!   a hydrostatic pressure-slope transform,
//! - [`scheme`]: the first- and second-order Godunov updates,
//! - [`time`]: forward-Euler and SSP-RK3 integrators with the CFL control,
//! - [`baselines`]: one-speed relaxation and non-well-balanced Rusanov
//!   reference schemes,
//! - [`cases`]: the built-in test problems and hydrostatic profiles,
//! - [`diag`]: error norms, convergence rates, energy/entropy monitors,
//! - [`snapshot`]: CSV field output,
//! - [`config`]: flat key=value run configuration,
//! - [`run`]: driver tying cases, schemes and diagnostics together,
//! - [`cli`]: the `hydrostat` command-line front end.

pub mod baselines;
pub mod cases;
pub mod cli;
pub mod config;
pub mod diag;
pub mod eos;
pub mod grid;
pub mod recon;
pub mod riemann;
pub mod run;
pub mod scheme;
pub mod snapshot;
pub mod time;

use thiserror::Error;

/// Crate-wide error type.
///
/// Configuration and I/O problems map to CLI exit code 1; solver aborts
/// (states leaving the admissible set, failed time integration) map to
/// exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    /// A thermodynamic input left its physical domain (for example a
    /// nonpositive density handed to the equation of state).
    #[error("non-physical {quantity}: {value}")]
    NonPhysical {
        quantity: &'static str,
        value: f64,
    },

    /// A conserved state decoded to a nonpositive internal energy or
    /// density, i.e. it left the admissible phase space.
    #[error("inadmissible state at cell ({i}, {j}): rho = {rho:e}, e = {e:e}")]
    InadmissibleState { i: usize, j: usize, rho: f64, e: f64 },

    /// The face solver produced a nonpositive intermediate density or
    /// internal energy. Carries the full face context for post-mortems.
    #[error("face solver positivity breach ({quantity} = {value:e}): {context}")]
    FacePositivity {
        quantity: &'static str,
        value: f64,
        context: String,
    },

    /// The a-priori hydrostatic closure was requested but the face carried
    /// no sampled hydrostatic profile values.
    #[error("a-priori closure needs hydrostatic profile samples on both sides of the face")]
    MissingHydrostaticSamples,

    /// Time stepping could not continue (vanishing time step, exhausted
    /// step budget, or similar).
    #[error("time integration failed: {0}")]
    TimeIntegration(String),

    /// Configuration file or CLI usage problem (exit code 1).
    #[error("{0}")]
    UsageError(String),

    /// Snapshot or report output could not be written.
    #[error("i/o failure writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code the CLI maps this error to: 1 for configuration
    /// and I/O problems, 2 for solver aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UsageError(_) | Error::Io { .. } | Error::MissingHydrostaticSamples => 1,
            Error::NonPhysical { .. }
            | Error::InadmissibleState { .. }
            | Error::FacePositivity { .. }
            | Error::TimeIntegration(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
