//! Satisfiability laboratory for random k-CNF-XOR formulas.
//!
//! A k-CNF-XOR formula conjoins ⌈rn⌉ width-k disjunctive clauses with ⌈sn⌉
//! variable-width parity constraints over n variables. As either density
//! grows, the probability that a random formula is satisfiable falls from
//! near 1 to near 0. This crate provides the pieces needed to study that
//! transition at desk scale:
//!
//! - [`formula`] / [`sample`] / [`dimacs`]: the data model, the uniform
//!   random generator, and DIMACS-XOR file I/O;
//! - [`gf2`]: bit-packed Gauss-Jordan elimination over GF(2);
//! - [`solver`]: a hybrid DPLL engine with XOR elimination feedback;
//! - [`count`]: exact model counting and the normalized log-count
//!   estimator for the CNF-only model;
//! - [`stattest`]: statistical checks of the random model's solution-space
//!   laws;
//! - [`bounds`]: closed-form lower/upper transition curves;
//! - [`lab`]: grid scans, crossing estimation and slope fits.

pub mod bounds;
pub mod count;
pub mod dimacs;
pub mod formula;
pub mod gf2;
pub mod lab;
pub mod sample;
pub mod seed;
pub mod solver;
pub mod stats;
pub mod stattest;

pub use bounds::{beta, curve, lambda_lower, r_validity_max, s_lower, s_upper, BoundCurve};
pub use count::{count_exact, estimate_phi, CountResult, PhiEstimate};
pub use formula::{Assignment, Formula, KClause, Literal, RandomModelParams, XorClause};
pub use lab::{estimate_crossing, fit_slope, scan, CrossingEstimate, GridSpec, ScanResult};
pub use sample::{sample_formula, sample_k_clause, sample_xor_clause};
pub use solver::{solve, SolveBudget, SolveOutcome, Verdict};
