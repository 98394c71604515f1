//! Closed-form solutions of Bernoulli initial-value problems
//! `y' = a(t) y + b(t) y^n`, `y(0) = d`, with `n` rational, and numerical
//! verification of the symmetries between pairs of such problems.

mod dopri;

pub mod cli;
pub mod closedform;
pub mod exec;
pub mod exponent;
pub mod expr;
pub mod fragment;
pub mod oracle;
pub mod quad;
pub mod symmetry;
