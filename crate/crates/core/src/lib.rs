//! Analysis of oscillatory integral operators
//! `Tf(x) = ∫ e^{iλS(x,y)} χ(x,y) f(y) dy` with polynomial phases.
//!
//! The symbolic side works on `F = ∂²S/∂x∂y` with exact rational
//! coefficients: Newton polygon, decay rate `δ = 1/(1+t₀)`, per-edge rates
//! and Newton–Puiseux branches of `{F = 0}`. The numerical side discretizes
//! `T_λ`, estimates `‖T_λ‖` by power iteration, and checks the observed
//! decay against `λ^{-δ/2}` globally and block by block.

pub mod blocks;
pub mod dyadpol;
pub mod newton;
pub mod opnorm;
pub mod polycore;
pub mod puiseux;
pub mod scaling;

pub use newton::{build_polygon, decay_rate, edge_rates, DecayReport, Degeneracy, NewtonPolygon};
pub use polycore::{mixed_derivative, parse_poly, BivarPoly, PuiseuxBranch, PuiseuxTerm};
pub use puiseux::{expand_branches, BranchSet};

/// Version tag written into every JSON document this crate emits.
pub const SCHEMA: &str = "newton-osc/1";
