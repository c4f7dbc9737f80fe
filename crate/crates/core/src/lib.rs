//! Exact-arithmetic feasibility engine for Hölder-Brascamp-Lieb multilinear
//! inequalities.
//!
//! Decides, over the rationals, whether a multilinear form built from
//! surjective linear maps `ℓ_j : Q^n → Q^{n_j}` and exponents `p_j` admits a
//! finite bound in terms of the `L^{p_j}` norms of its inputs. The decision is
//! a linear-algebraic one: it depends only on the dimensions `dim ℓ_j(V)` as
//! `V` ranges over subspaces of the ambient space. The engine explores that
//! subspace lattice exactly, emits machine-checkable feasibility certificates
//! or infeasibility scaling witnesses, and cross-validates verdicts with a
//! floating-point Gaussian oracle.
//!
//! Module map:
//! - [`ratlin`]: arbitrary-precision rational matrices and canonical subspaces
//! - [`datum`]: problem inputs for all supported modes, plus the file format
//! - [`engine`]: subspace functionals, lattice search, finite-field scans,
//!   and the feasibility decision
//! - [`certificate`]: proof trees for feasibility, scaling witnesses for
//!   infeasibility, and their independent verifiers
//! - [`polytope`]: the exponent polytope and exact vertex enumeration
//! - [`oracle`]: Gaussian ratio evaluation, ascent, and blow-up slope checks
//! - [`finner`]: direct per-index checker for product-structure data

pub mod certificate;
pub mod datum;
pub mod engine;
pub mod finner;
pub mod fixtures;
pub mod oracle;
pub mod polytope;
pub mod ratlin;
