//! Exact solvers for asymmetric hub location with multiple allocation limits.

pub mod bnc;
pub mod cli;
pub mod instance;
pub mod lp;
pub mod models;
pub mod oracle;
pub mod transport;
