//! deficit-lab: desk-scale numerical verification of the dimensional-lift
//! identities connecting elliptic and parabolic deficit functions for the
//! heat equation on R^n.
//!
//! The library is organized around a small set of exactly-differentiable
//! ground truths (Gaussian-mixture heat solutions) against which every
//! identity is checked either exactly, by controlled finite differences, or
//! by measured O(N^{-1}) convergence rates:
//!
//! - [`heat_model`]: closed-form positive heat solutions and their jets.
//! - [`parabolic`]: the deficit D0 = t(|∇f|²+f_t)+(tf)_t and its evolution
//!   identity Box(D0 u) = -2t|F|² u.
//! - [`lift`]: the almost-harmonic lift v = r^{2-m} e^{-f} on R^n x R^N, the
//!   elliptic deficit d0 = 2m(|∇b|²-1), the exact drift identity for
//!   Δ(d0 v)/v, and the residuals that vanish at rate N^{-1}.
//! - [`slicing`]: off-center sphere slicing, the weight h(x,r) = r γ(θ),
//!   total mass asymptotics, and the elliptic mean-value route to the
//!   Gaussian representation formula.
//! - [`entropy`]: the W functional, its monotonicity, the log-Sobolev
//!   deficit, and the Poincaré projection limit.
//! - [`quadrature`], [`special`], [`sweep`]: the numerical substrate —
//!   adaptive Gauss-Kronrod rules with a log-domain mode, log-domain sphere
//!   volumes and cap fractions, and log-log rate fitting.
//! - [`cli`]: the batch experiment runner behind the `deficit-lab` binary.
//!
//! Run `cargo run --release -- all --config config/all.cfg` for the full
//! verification sweep, or see `examples/` for focused walkthroughs.

// `!(x > 0.0)` is used deliberately throughout: unlike `x <= 0.0` it also
// rejects NaN inputs at the domain guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod corpus;
pub mod entropy;
pub mod error;
pub mod heat_model;
pub mod lift;
pub mod parabolic;
pub mod quadrature;
pub mod slicing;
pub mod special;
pub mod sweep;

pub use error::{Error, Result};
pub use heat_model::{FJet, GaussianMixture, HeatJet};
pub use lift::{LiftEval, LiftPoint};
pub use parabolic::ParabolicEval;
pub use quadrature::{QuadResult, QuadratureSpec};
pub use slicing::SliceGeometry;
pub use sweep::RateFit;
