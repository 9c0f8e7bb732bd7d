//! Second-order stochastic dominance cores of stochastic cooperative games.
//!
//! The crate is `no_std` (it needs `alloc`). Every decision procedure reduces
//! to a small linear feasibility problem solved by the [`lp`] kernel.
//!
//! * [`distributions`]: the five distribution families and their affine images.
//! * [`ssd`]: closed-form and numeric second-order dominance tests.
//! * [`coopgame`]: classical TU-games, cores and structural predicates.
//! * [`ssdcore`]: stochastic games, allocations and SSD-core deciders.
//! * [`newsvendor`]: the multiple risk-averse newsvendors application.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod coopgame;
pub mod distributions;
pub mod linalg;
pub mod lp;
pub mod newsvendor;
mod special;
pub mod ssd;
pub mod ssdcore;

pub use coopgame::{ClassicalGame, Coalition, GameError, MAX_PLAYERS};
pub use distributions::{Distribution, DistributionError, Family};
pub use lp::{LinearSystem, LpError, LpOutcome};
pub use newsvendor::{CooperationReport, NewsvendorError, NewsvendorProblem};
pub use ssd::{NumericVerdict, OracleConfig, SsdError, SsdVerdict};
pub use ssdcore::{Allocation, CoreError, StochasticGame};

/// Default absolute tolerance for feasibility and membership checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
