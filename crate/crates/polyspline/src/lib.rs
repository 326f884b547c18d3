//! Interpolatory Beppo Levi L_k-splines and transfinite polyspline surfaces.
//!
//! This crate builds thin-plate-type surfaces that interpolate whole curves
//! prescribed on concentric circles. Separation of variables reduces the
//! surface problem to a family of univariate spline problems, one per angular
//! frequency `k`: each Fourier amplitude of the surface is the interpolatory
//! L_k-spline whose end behaviour near 0 and infinity is pinned down by a
//! pair of mutually adjoint differential operators. The crate provides
//!
//! * exact symbolic calculus on the `r^a ln^m r` function class
//!   ([`powerlog`]) and the frequency operators acting on it ([`operators`]),
//! * spline construction, evaluation, and the kernel-dilate representation
//!   ([`spline`]),
//! * the per-frequency energy seminorm, orthogonality/optimality checks, the
//!   positive definite log-coordinate kernel, and a convergence-order harness
//!   ([`analysis`]),
//! * Fourier synthesis of surfaces from sampled boundary curves with an
//!   annulus error bound ([`surface`]),
//! * JSON/CSV artifact formats ([`artifact`]) and a randomized verification
//!   suite ([`verify`]) backing the `polyspline` command-line tool.
//!
//! The `book/` directory of the repository contains a guide whose code
//! snippets double as doc-tests.

pub mod analysis;
pub mod artifact;
pub mod knots;
pub mod operators;
pub mod piecewise;
pub mod powerlog;
pub mod quadrature;
pub mod spline;
pub mod surface;
pub mod verify;

pub use knots::KnotSet;
pub use piecewise::PiecewiseRadial;
pub use powerlog::{PowerLogExpr, PowerLogTerm};
pub use spline::{build_by_collocation, build_interpolant, build_interpolant_complex};
pub use spline::{BeppoLeviSpline, ComplexSpline};
