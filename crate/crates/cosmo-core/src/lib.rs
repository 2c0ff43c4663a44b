//! Symbolic and numeric toolkit for scalar-field cosmology.
//!
//! The crate is organised in layers:
//!
//! * [`expr`] is a small computer-algebra kernel: immutable expression
//!   trees with exact rational constants, differentiation, substitution,
//!   canonical forms, zero testing, linear solving and a restricted
//!   antiderivative.
//! * [`tensor`] implements component-wise tensor calculus on a fixed
//!   four-dimensional metric: Christoffel symbols, Ricci and Einstein
//!   tensors, index raising/lowering, covariant divergences and the
//!   scalar wave operator.
//! * [`cosmo`] assembles the field equations of a homogeneous isotropic
//!   universe with a scalar field and an optional perfect fluid, and
//!   reduces them to a first-order system in the expansion rate.
//! * [`reverse`] reconstructs the scalar-field potential from a
//!   prescribed expansion history and checks the result for consistency.
//! * [`numeric`] integrates the reduced system forward in time and
//!   provides finite-difference oracles and residual scans.

pub mod expr;
pub mod par;
pub mod tensor;
pub mod cosmo;
pub mod reverse;
pub mod numeric;

pub use expr::Expr;
