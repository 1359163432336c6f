//! # gfi-core
//!
//! Functional-inequality constants and estimators for Gaussian-smoothed
//! discrete measures.
//!
//! The central object is the convolution `μ ⋆ γ_δ` of a finitely supported
//! probability measure `μ` (atoms inside the ball `B_d(0, R)`) with the
//! Gaussian `N(0, δ²I_d)`. For such measures the crate provides, side by side:
//!
//! * **closed-form constant bounds** ([`bounds`]) for the Poincaré,
//!   logarithmic Sobolev, transport-entropy and convex log-Sobolev
//!   inequalities, each as a pure function of `(δ, R, d, N)` with its
//!   validity region;
//! * **independent numerical estimators** ([`spectral`]) — grid eigensolves
//!   for the spectral gap, entropy-ratio maximization for log-Sobolev lower
//!   bounds, decomposition identities, a Muckenhoupt constant and a Lyapunov
//!   condition checker;
//! * **constructive decompositions** ([`decomp`]) — Gaussian regularization
//!   of Lipschitz potentials, convex-plus-bounded splittings with certified
//!   curvature and sup-norm numbers, and the radial reduction for
//!   spherically symmetric measures;
//! * **optimal transport** ([`transport`]) — exact network-simplex and
//!   entropic solvers, the quadratic/ℓ⁴/composite cost functions, relative
//!   entropy on grids, and machine checks of the cost-chain inequalities;
//! * **Monte Carlo concentration checks** ([`concentration`]) — sub-Gaussian
//!   tail verification for Lipschitz functions, the convex log-Sobolev
//!   inequality, the inf-convolution identity and a conjecture-exploration
//!   sweep over discrete measures.
//!
//! Everything is deterministic given explicit seeds, so parameter sweeps can
//! be replicated bit-for-bit.

// `!(x > 0.0)` style guards are deliberate: they reject NaN along with the
// out-of-range values, which `x <= 0.0` would let through. Index loops over
// small symmetric matrices read better than iterator chains here.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::type_complexity)]

pub mod bounds;
pub mod concentration;
pub mod decomp;
pub mod error;
pub mod grid;
pub mod measure;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod transport;

pub use bounds::{BoundReport, InequalityKind};
pub use error::{Error, Result};
pub use grid::GridDomain;
pub use measure::{BallMeasure, SmoothedMeasure, TiltedMoments};
