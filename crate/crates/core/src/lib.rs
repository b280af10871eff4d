//! Agent-based simulation of a CO2 capture, transport and storage market.
//!
//! Supply agents (emitters) choose demand agents (storage or utilization
//! sinks) and a line-haul mode each year, subject to a profitability test
//! under a shared per-tonne credit. The crate covers the domain model,
//! transport geometry, economics, the five matching rules, the annual-tick
//! engine, file formats and batch experiments.

pub mod econ;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod geo;
pub mod io;
pub mod matching;
pub mod model;
pub mod rng;
pub mod stats;

pub use econ::{evaluate_connection, ConnectionEvaluation};
pub use engine::{run_replication, Connection, Engine, ReplicationResult, Scenario, Totals};
pub use error::{Error, Result};
pub use geo::{great_circle_miles, ModeNetwork, Networks, Route};
pub use matching::{select, MatchDecision};
pub use model::{
    Algorithm, Capacity, DemandAgent, EconomicParams, GeoPoint, Mode, ModeSet, ScenarioConfig, SinkCategory, SourceType,
    SupplyAgent,
};
pub use stats::{describe, Stat};
