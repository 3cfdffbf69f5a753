#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod dd;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod exec;
pub mod quad;
pub mod sampler;
pub mod scalar;
pub mod specfun;
pub mod verify;

pub use ensemble::{Disk, DiskSystem, EnsembleParams, RadiusSpec, Regime};
pub use error::{Error, Result};
pub use exec::Execution;
