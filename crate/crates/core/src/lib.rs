//! psifrac: numerical tools for nonlinear impulsive Ψ-Hilfer fractional
//! differential equations
//!
//! ```text
//! ^H D^{μ,ν;Ψ}_{a+} u(t) = f(t, u(t)),   t ∈ [a, T] \ {t_1, …, t_m}
//! Δ I^{1−ϱ;Ψ} u(t_k) = ζ_k,              I^{1−ϱ;Ψ} u(a) = δ
//! ```
//!
//! with ϱ = μ + ν − μν. Problems are solved through the equivalent Volterra
//! integral equation
//!
//! ```text
//! u(t) = Ω(t)·(δ + Σ_{t_k < t} ζ_k) + I^{μ;Ψ} f(t, u(t)),   Ω(t) = (Ψ(t) − Ψ(a))^{ϱ−1}/Γ(ϱ)
//! ```
//!
//! by Picard iteration in the weighted sup-norm, with product-integration
//! quadrature for the weakly singular kernels. A nonlocal variant replaces δ
//! by δ − g(u).
//!
//! Modules:
//! - [`psi`]: the weight function Ψ
//! - [`fracops`]: Ψ-fractional integrals, the numeric Ψ-Hilfer derivative, Γ and B
//! - [`expr`]: the expression language for f, Ψ and nonlocal combiners
//! - [`solver`]: problem definition, Picard solvers, condition checks, residuals
//!
//! Per-node work runs on rayon when the `parallel` feature (default) is on;
//! see [`Execution`].

// `!(x > 0.0)` is used on purpose to reject NaN along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod expr;
pub mod fracops;
pub mod psi;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
pub use expr::Expr;
pub use fracops::{OrderPair, SampledFunction};
pub use psi::{PsiFunction, PsiKind};
