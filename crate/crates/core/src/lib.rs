//! Co-training of a neural control policy and a neural Zubov stability
//! certificate, with interval branch-and-bound certification of the
//! largest verified sublevel set and an LQR baseline for comparison.
//!
//! Modules:
//! - [`dynamics`]: the four benchmark systems and linearization.
//! - [`net`]: small MLPs, nested autodiff, actuation parameterizations.
//! - [`sim`]: RK4 trajectory rollout and value-integral estimation.
//! - [`train`]: actor-critic losses and the training loop.
//! - [`lqr`]: Riccati solution and certified-ellipse bisection baseline.
//! - [`verify`]: interval arithmetic, branch-and-bound certification,
//!   level-set search, area estimation, SMT-LIB export.
//! - [`plot`]: grid/vector-field/level-set data emission.

pub mod dynamics;
pub mod error;
pub mod lqr;
pub mod net;
pub mod plot;
pub mod presets;
pub mod scalar;
pub mod sim;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
pub use verify::interval::{BoxRegion, Interval};
