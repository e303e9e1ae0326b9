//! Sturm-Liouville problems `-y'' + q(x) y = lambda y` on finite metric trees.
//!
//! A tree is a finite set of edges of positive length glued at vertices. On
//! every edge the equation above holds in a local coordinate that runs from
//! the endpoint farther from a distinguished root vertex (coordinate `0`) to
//! the closer endpoint (coordinate `a_i`). Pendant vertices carry Neumann
//! conditions `y'(0) = 0`, internal vertices carry continuity plus a Kirchhoff
//! flux balance, and one pendant vertex may instead be marked Dirichlet.
//!
//! Everything numerical is generic over the scalar type through the [`Real`]
//! trait (`f32` or `f64`); the aliases at the crate root fix `f64`, which is
//! what the stated tolerances assume.

pub mod charfn;
mod dd;
pub mod diophantine;
mod error;
pub mod experiment;
mod fd;
pub mod format;
pub mod potential;
mod scalar;
pub mod spectrum;
pub mod transfer;
pub mod tree;

pub use error::{Error, Result};
pub use scalar::Real;

/// Metric tree with `f64` edge lengths.
pub type CharPair64 = charfn::CharPair<f64>;
pub type Spectrum64 = spectrum::Spectrum<f64>;
pub type Tree64 = tree::MetricTree<f64>;
/// Edge potential with `f64` coefficients.
pub type Potential64 = potential::EdgePotential<f64>;
/// Potential assignment for a whole tree, `f64` coefficients.
pub type Potentials64 = potential::PotentialVector<f64>;
/// Fundamental-solution endpoint values at one spectral parameter, `f64`.
pub type Transfer64 = transfer::TransferValues<f64>;
