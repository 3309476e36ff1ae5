//! Analysis of decorated resolution graphs of foliation singularities.
//!
//! The crate has two halves:
//!
//! * exact combinatorics on the dual graph of the exceptional divisor —
//!   negative-definiteness certificates, the rational h-recursion,
//!   Camacho-Sad index bookkeeping, separatrix witnesses and approximation
//!   chains;
//! * a numeric verifier for the local dynamics of reduced normal forms —
//!   monotone moduli along saddle flows, saddle-node accumulation, nodal
//!   separator conservation and leafwise saturation coverage.
//!
//! Everything weight-derived is exact rational arithmetic; indices are
//! double-precision complex values checked against a configurable tolerance.

pub mod chains;
pub mod cs;
pub mod definiteness;
pub mod fixtures;
pub mod flow;
pub mod graph;
pub mod numeric;
pub mod report;
pub mod tree;

pub use graph::{
    Component, CornerSingularity, DecoratedGraph, GraphError, IntersectionMatrix, TailSingularity,
};
pub use numeric::{BigRational, Complex64, DEFAULT_TOLERANCE};
