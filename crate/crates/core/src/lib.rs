//! Exact Fisher information geometry for small Ising-type systems.
//!
//! The crate builds exponential-family (Boltzmann) models on small graphs and
//! hypergraphs, computes their Fisher information matrices by exact state
//! enumeration, and analyzes the induced geometry: spectral conditioning,
//! the combined metric g(c) = F² + cF, the convergence-optimal regime
//! parameter α, directional regime structure, the deviation tensor, and
//! natural-gradient flow on quadratic objectives. A sweep harness reproduces
//! the full 13-topology × 7-coupling verification table with CSV/JSON/SVG
//! reports and golden-file comparison.
//!
//! Modules are layered bottom-up: [`hypergraph`] (substrates and the topology
//! catalog), [`spectral`] (dense symmetric eigendecomposition), [`expfam`]
//! (models and Fisher matrices), [`regime`] (α optimality), [`directional`]
//! (per-eigendirection structure), [`dynamics`] (gradient flows), and
//! [`harness`] (the sweep and report emitters).

pub mod directional;
pub mod dynamics;
mod error;
pub mod expfam;
pub mod harness;
pub mod hypergraph;
pub mod regime;
pub mod spectral;

pub use error::{Error, Result};
