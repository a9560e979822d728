//! Framed charts, covariant derivatives of fields, and residuals of the
//! Killing-type equations.
//!
//! Fields live in frame components. Derivatives come from second-order
//! forward-mode jets: a field value seeded at a point carries exact first
//! and second partials, so `∇Φ` is exact to first order and `∇(dΦ)` has an
//! exact value.
//!
//! Connection convention: `∇_{X_i}X_m = Σ_k ω_i^{mk} g_mm X_k`, so that
//! `∇_{X_i}Y = Σ ω_i^{jk} g(Y, X_j) X_k` and the spin connection acts as
//! `¼ Σ ω_i^{jk} γ_j γ_k`.

mod chart;
mod field;
pub mod killing;
mod report;

pub use chart::{
    connection_from_frame, Connection, ConnectionFn, DomainFn, FrameFn, FramedChart, LocalFrame, SampleRegion,
};
pub use field::{invariant_operators, Field, FieldFn, FieldJet, FieldKind, InvariantOperators, VectorField, VectorFn};
pub use killing::{residual_at, Equation, KillingData, PrimitiveCheck};
pub use report::{column, sweep, sweep_many, Expect, ResidualReport};
