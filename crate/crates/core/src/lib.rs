//! Oscillation and non-oscillation of linear systems
//!
//! ```text
//! Φ' = P(t) Φ + Q(t) Ψ
//! Ψ' = R(t) Φ + S(t) Ψ
//! ```
//!
//! with 2×2 matrix coefficients and diagonal `Q`.

// `!(x > y)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod criteria;
pub mod expr;
pub mod integrate;
pub mod oscillation;
pub mod quad;
pub mod system;
