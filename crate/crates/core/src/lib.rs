//! Purity/correlation complementarity in multipartite quantum states.
//!
//! - [`qla`]: dense complex linear algebra, partial traces and entropies
//! - [`states`]: canonical states and seeded fixed-rank random states
//! - [`measures`]: normalized purity and six bipartite correlation measures
//! - [`complementarity`]: bounds, per-state records and ensemble statistics
//! - [`keyrate`]: the complementarity-based secret key rate bound
//! - [`cli`]: the `qcomp` command-line front end

pub mod cli;
pub mod complementarity;
pub mod error;
pub mod keyrate;
pub mod measures;
pub mod qla;
pub mod states;

pub use error::{Error, Result};
