//! Tail and expectation bounds for matrix infinitely divisible series.
//!
//! A matrix i.d. series is S = Σ_k ξ_k A_k where the A_k are fixed
//! self-adjoint d×d matrices and the ξ_k are independent centered
//! infinitely divisible scalars sharing one Lévy triplet (σ², ν) with a
//! finite discrete Lévy measure ν. This crate evaluates exponential
//! bounds on P{‖S‖ > t} and E‖S‖, validates them by Monte Carlo
//! simulation, and applies them to chance-constrained and
//! orthogonality-constrained quadratic optimization through an SDP
//! relaxation with i.d. randomized rounding.
//!
//! Module map:
//! - [`levy_core`]: the i.d. model (σ², atoms), moments, α, α⁻¹, Φ, exact sampling.
//! - [`scalar_bounds`]: the scalar curves Q, B, T, the exponent τ(β,s), the
//!   piecewise lower bound H_P of Q, and the B/H_c crossing point.
//! - [`matrix_core`]: dense symmetric eigensolver, dilation, spectral norm,
//!   series curvature ρ and its rectangular variant ρ₁.
//! - [`tail_bounds`]: the quadrature-exact, Bennett, Bernstein, H_c and
//!   β₀-piecewise tail bounds, expectation bounds, and quantile forms.
//! - [`monte_carlo`]: deterministic parallel simulation of ‖S‖ with
//!   Clopper-Pearson intervals and bound-versus-empirical comparison.
//! - [`opt_apps`]: dilation thresholds, chance-constraint approximation with
//!   the Schur-complement LMI, the SDP relaxation with partial-trace caps,
//!   randomized rounding, and feasibility bounds for the rounded solution.

pub mod error;
pub mod levy_core;
pub mod matrix_core;
pub mod monte_carlo;
pub mod opt_apps;
pub mod scalar_bounds;
pub mod tail_bounds;

pub use error::{Error, Result};
