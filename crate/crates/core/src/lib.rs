//! Numerical laboratory for harmonic analysis on `SU(2) ≅ S³` and on the
//! waveguide `ℝ × 𝕋`.
//!
//! * [`su2`]: group elements, irreducible representation matrices, ladder
//!   coefficients, characters and Haar quadrature.
//! * [`cg`]: Clebsch–Gordan tables built by lowering chains, with a Casimir
//!   eigenprojector oracle.
//! * [`bilinear`]: eigenfunctions of the Laplacian on `S³` in the matrix-entry
//!   basis and exact `L²` norms of their products.
//! * [`lattice`]: brute-force measure and counting on `ℝ × ℤ` and `ℤ²`.
//! * [`strichartz`]: discretized free Schrödinger evolution on `ℝ × 𝕋`,
//!   quartic space-time norms and the frequency-side quadrilinear form.
//!
//! Heavy scans run through [`par`], which uses rayon when the `parallel`
//! feature is enabled (the default) and a plain loop otherwise.

pub mod bilinear;
pub mod cg;
pub mod error;
pub mod lattice;
pub mod par;
pub mod stats;
pub mod strichartz;
pub mod su2;

pub use error::{Error, Result};
pub use num_complex::Complex64;
