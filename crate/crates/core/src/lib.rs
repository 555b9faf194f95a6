//! Multi-hop transmission capacity of Poisson ad hoc networks.
//!
//! Closed-form route counts, outage lower bounds and capacity upper bounds
//! (`analytics`), the per-hop channel coefficients they rest on (`channel`),
//! the quadratic-form geometry behind them (`geometry`), brute-force
//! references (`oracle`) and a Monte Carlo network simulator (`simulator`).

pub mod analytics;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod simulator;
pub mod special;

pub use analytics::{CapacityResult, NetworkConfig, RetransPolicy};
pub use channel::{ChannelModel, FadingSpec, HopModel, OutageRegime};
pub use error::{Error, Result};
pub use geometry::{AttemptVector, Point, RelayChain};
pub use simulator::{McEstimate, NetworkRealization, SimMode, SimOptions};
