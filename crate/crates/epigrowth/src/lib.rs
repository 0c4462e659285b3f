//! Spectral simulation of a stochastic growth equation for a crystalline
//! surface on the periodic square [0, L]^2.
//!
//! The height profile u(t, x) is mean-zero and evolves by
//!
//! ```text
//! du = ( -delta Lap^2 u - div f(grad u) ) dt + sigma dW,      f(z) = z / (1 + |z|^2)
//! ```
//!
//! driven by space-time white noise W. All fields live in a truncated
//! sine/cosine basis, where the linear operators are diagonal and the
//! stochastic convolution is an independent Ornstein-Uhlenbeck process per
//! mode that can be sampled exactly. The noise is mollified by a spectral
//! profile `alpha_k` with strength parameter `eps`; the interesting regime
//! is what happens to the slope-current term `div f(grad u)` as `eps`
//! shrinks and the rough noise comes back.
//!
//! Module layout:
//! - [`lattice`], [`field`], [`transform`]: wavenumber bookkeeping, spectral
//!   fields, Sobolev-scale operators, and grid transforms.
//! - [`profile`], [`convolution`], [`moments`]: noise mollifiers, exact OU
//!   sampling of the stochastic convolution, and its closed-form statistics.
//! - [`nonlinearity`], [`solver`], [`picard`]: the slope current, an
//!   exponential integrator for the full equation, and a fixed-point solver
//!   for the integral form of the same equation.
//! - [`ensemble`], [`studies`]: Monte Carlo harness and the convergence /
//!   bound studies built on it.
//! - [`io`]: binary field dumps, CSV, and PGM writers.

pub mod convolution;
pub mod ensemble;
pub mod field;
pub mod io;
pub mod lattice;
pub mod moments;
pub mod nonlinearity;
pub mod picard;
pub mod profile;
pub mod solver;
pub mod studies;
pub mod transform;

pub use field::{PhysicalGrid, SpectralField, VectorField};
pub use lattice::{Mode, WavenumberLattice};
pub use profile::{ProfileKind, RegularizationProfile};
pub use solver::{simulate, SimulationConfig, Trajectory};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The (0,0) mode carries the spatial mean, which is fixed to zero.
    #[error("the (0,0) mode is excluded: fields are mean-zero")]
    MeanMode,
    #[error("{name} must satisfy {need}, got {got}")]
    BadParam {
        name: &'static str,
        need: &'static str,
        got: f64,
    },
    #[error("grid of {n} points per axis cannot hold modes up to {trunc}: need at least {min}")]
    GridTooCoarse { n: usize, trunc: i32, min: usize },
    #[error("fixed-point iteration stalled: residual {residual:.3e} after {iters} sweeps (tol {tol:.1e})")]
    NoConvergence {
        residual: f64,
        iters: usize,
        tol: f64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_param(ok: bool, name: &'static str, need: &'static str, got: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::BadParam { name, need, got })
    }
}
