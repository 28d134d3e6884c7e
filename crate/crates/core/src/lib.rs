//! Polynomial Bergman spaces for exponentially weighted planar measures.
//!
//! The crate builds `H_{m,n}`, the analytic polynomials of degree `< n`
//! square-integrable against `e^{-mQ} dA`, evaluates its reproducing kernel
//! and the associated Berezin measures, and provides the machinery to test
//! their large-`m` behaviour numerically: concentration on the droplet,
//! Gaussian rescaling limits, the first-order kernel expansion, off-diagonal
//! decay, weighted `∂̄` estimates and the harmonic-measure limit of the
//! Bargmann–Fock case.
//!
//! Normalizations used throughout: `dA = dx dy / π`, `Δ = ∂∂̄`.

pub mod acceptance;
pub mod berezin;
pub mod dbar;
pub mod error;
pub mod expansion;
pub mod experiment;
pub mod fock;
pub mod kernel;
pub mod numerics;
pub mod potential;
pub mod table;
pub mod weights;

pub use error::{Error, Result};
pub use kernel::{BergmanSpace, ReproducingKernel};
pub use numerics::{LogValue, PlanarQuadrature};
pub use weights::{Weight, WeightDescriptor};
