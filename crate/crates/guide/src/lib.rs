//! Doc-test shim for the guide in `book/`.
//!
//! mdBook cannot run snippets against this workspace's crates, so each
//! chapter is included here as module documentation and `cargo test --doc`
//! executes every Rust code block. One module per chapter keeps failures
//! attributable to a file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/power-log-calculus.md")]
pub mod power_log_calculus {}

#[doc = include_str!("../../../book/src/radial-splines.md")]
pub mod radial_splines {}

#[doc = include_str!("../../../book/src/energy-and-optimality.md")]
pub mod energy_and_optimality {}

#[doc = include_str!("../../../book/src/convergence.md")]
pub mod convergence {}

#[doc = include_str!("../../../book/src/surfaces.md")]
pub mod surfaces {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
