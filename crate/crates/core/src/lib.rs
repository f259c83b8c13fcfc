//! Simulation and optimization toolkit for agile Earth-observation
//! constellations that process imagery on board, in orbit.
//!
//! The crate models the full acquisition-to-delivery chain:
//!
//! * [`geometry`]: circular-orbit propagation, target visibility, ring
//!   inter-satellite topology and ground-station contacts.
//! * [`atmosphere`]: optical turbulence (Cn2) sampling and quality gating.
//! * [`acquisition`]: attitude transitions, observation windows, ground
//!   sample distance and observation profit.
//! * [`obs_sched`]: observation scheduling under agility and maneuver-energy
//!   constraints (exact, genetic and first-come solvers), plus rescheduling
//!   of turbulence-degraded targets across scheduling horizons.
//! * [`compute`]: bulk-synchronous-parallel execution model for on-board and
//!   ground processors, with a stochastic execution-time model.
//! * [`network`]: inter-satellite and downlink budgets, adaptive modulation
//!   and coding, latency and transmit-energy models.
//! * [`proc_sched`]: convex energy-minimizing allocation of each frame
//!   across the ring and the ground station.
//! * [`pipeline`]: slotted scatter/process/gather simulation of entire
//!   episodes, with Monte Carlo replication and energy ledgers.
//! * [`scenario`] and [`experiments`]: declarative configuration and the
//!   canned experiment drivers behind the command-line interface.
//! * [`oracle`]: slow, independent reference implementations used by the
//!   test suite to cross-check the solvers. Nothing here shares code with
//!   the production paths.
//!
//! All quantities are SI unless a name says otherwise (`_km`, `_deg`, `_db`).

pub mod acquisition;
pub mod atmosphere;
pub mod compute;
pub mod experiments;
pub mod geometry;
pub mod network;
pub mod obs_sched;
pub mod oracle;
pub mod pipeline;
pub mod proc_sched;
pub mod rng;
pub mod scenario;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Constellation or ring topology cannot be built as requested.
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    /// A single malformed configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Scenario validation problems, all of them.
    #[error("scenario validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    /// Argument outside the domain of a model.
    #[error("domain error: {0}")]
    Domain(String),
    /// Offered load exceeds what the platforms can process.
    #[error("infeasible load: {0}")]
    InfeasibleLoad(String),
    /// No allocation satisfies the constraint set; names the violated rows.
    #[error("infeasible allocation; violated constraints: {}", .0.join(", "))]
    Infeasible(Vec<String>),
    /// Instance is larger than the configured exact-solver cap.
    #[error("exact-solver cap exceeded: {0}")]
    SolverCap(String),
    /// Ring route cannot be constructed.
    #[error("no route: {0}")]
    NoRoute(String),
    /// No ground station is visible at the requested time.
    #[error("no downlink contact at t={0:.1} s")]
    NoContact(f64),
    /// Execution-time model fitting failed.
    #[error("model fit failed: {0}")]
    Fit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
