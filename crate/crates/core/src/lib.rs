//! Autobidding ad auctions with user costs.
//!
//! Bidders are ROI-constrained value maximizers using uniform bidding
//! (`b[i][j] = theta_i * v[i][j]`, `theta_i >= 1`). The crate clears
//! auctions under second-price and cost-multiplier mechanisms, computes exact
//! best responses, runs best-response dynamics, and checks welfare ratios
//! against optimal welfare. All arithmetic is exact.

pub mod bestresponse;
pub mod equilibrium;
pub mod error;
pub mod instances;
pub mod mechanisms;
pub mod model;
pub mod rational;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use mechanisms::{MechanismKind, MechanismSpec};
pub use model::{Instance, MultiplierProfile, Outcome};
pub use rational::{ExtendedRational, Rational};
