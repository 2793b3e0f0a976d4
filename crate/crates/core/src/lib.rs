//! Levi-Civita connections and curvature on free modules of one-forms over
//! twisted group algebras.
//!
//! The crate is organized bottom-up:
//!
//! - [`algebra`]: the twisted group algebra ℂ[ℤⁿ]_θ — product, involution,
//!   trace, ℓ¹ norm, derivations, and certified inversion.
//! - [`forms`]: free bimodules of one-forms with a central basis, the flip
//!   σ and its leg actions on tensor squares/cubes, the symmetrizer, the
//!   wedge projection, and the differential on zero- and one-forms.
//! - [`metric`]: central and conformally deformed pseudo-Riemannian metrics,
//!   their action on tensor squares, and the differential of the metric.
//! - [`connection`]: metric-compatible torsion-free connections — the
//!   cyclic-sum solver, the conformal closed form, the truncated linear
//!   solver, and residual diagnostics.
//! - [`curvature`]: Riemann and Ricci curvature and the scalar curvature,
//!   plus the closed-form expressions available on the two-generator algebra.
//! - [`presets`]: ready-made geometries (the two-generator deformed torus
//!   and the three-dimensional Heisenberg-type space).
//! - [`testkit`]: a small deterministic sampler used by tests and the CLI
//!   self-test; not part of the numerical core.

pub mod algebra;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod forms;
pub mod metric;
pub mod presets;
pub mod testkit;

pub use error::{Error, Result};
