//! Three-laser atom interferometry: exact transfer-matrix scattering, the
//! semiclassical trajectory limit, a path expansion of the exact amplitude,
//! and fringe analysis on top of them.

pub mod constants;
pub mod error;
pub mod par;
pub mod physics;
pub mod semiclassical;
pub mod transfer;
pub mod scattering;
pub mod paths;
pub mod fringe;
pub mod cli;

pub use error::{Error, Result};
pub use par::ExecPolicy;
pub use physics::Setup;
