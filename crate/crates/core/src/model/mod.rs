//! Domain types shared by every stage of the simulation.
//!
//! Agents, transport modes and locations live here, together with the
//! economic parameter set ([`EconomicParams`]) and the scenario
//! configuration ([`ScenarioConfig`]) with its validation rules.

mod agents;
mod params;
mod scenario;

pub use agents::{
    AgentState, Capacity, DemandAgent, SinkCategory, SourceType, SupplyAgent,
};
pub use params::{CostMultipliers, EconomicParams, RevenueTable, TransportRates};
pub use scenario::{Algorithm, InputPaths, ScenarioConfig, Violation};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A location in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lon: f64,
    lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self, ModelError> {
        if !(-180.0..=180.0).contains(&lon) {
            return Err(ModelError::Longitude(lon));
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(ModelError::Latitude(lat));
        }
        Ok(Self { lon, lat })
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }
}

/// Transport carriers. `Truck` only ever serves the access legs of water routes.
///
/// The declaration order is the documented tie-break order for line-haul
/// modes (Pipeline < Rail < Water).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pipeline,
    Rail,
    Water,
    Truck,
}

impl Mode {
    /// Modes that can carry the middle leg of a route.
    pub const LINE_HAUL: [Mode; 3] = [Mode::Pipeline, Mode::Rail, Mode::Water];

    pub fn is_line_haul(self) -> bool {
        self != Mode::Truck
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Pipeline => "pipeline",
            Mode::Rail => "rail",
            Mode::Water => "water",
            Mode::Truck => "truck",
        }
    }

    /// Index into per-line-haul-mode arrays. Panics for `Truck`.
    pub(crate) fn index(self) -> usize {
        match self {
            Mode::Pipeline => 0,
            Mode::Rail => 1,
            Mode::Water => 2,
            Mode::Truck => panic!("truck has no line-haul index"),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pipeline" => Ok(Mode::Pipeline),
            "rail" => Ok(Mode::Rail),
            "water" | "barge" => Ok(Mode::Water),
            "truck" => Ok(Mode::Truck),
            _ => Err(ModelError::UnknownName {
                kind: "mode",
                value: s.to_string(),
            }),
        }
    }
}

/// Set of line-haul modes an agent may use.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSet(u8);

impl ModeSet {
    pub const EMPTY: ModeSet = ModeSet(0);
    pub const ALL_LINE_HAUL: ModeSet = ModeSet(0b111);

    pub fn with(mut self, mode: Mode) -> Self {
        self.insert(mode);
        self
    }

    /// Inserting `Truck` is a no-op: trucks are never a line-haul choice.
    pub fn insert(&mut self, mode: Mode) {
        if mode.is_line_haul() {
            self.0 |= 1 << mode.index();
        }
    }

    pub fn remove(&mut self, mode: Mode) {
        if mode.is_line_haul() {
            self.0 &= !(1 << mode.index());
        }
    }

    pub fn contains(self, mode: Mode) -> bool {
        mode.is_line_haul() && self.0 & (1 << mode.index()) != 0
    }

    pub fn intersection(self, other: ModeSet) -> ModeSet {
        ModeSet(self.0 & other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Mode> {
        Mode::LINE_HAUL.into_iter().filter(move |m| self.contains(*m))
    }

    /// Parses a `|`-separated list such as `pipeline|rail`. Blank means all.
    pub fn parse_list(s: &str) -> Result<Self, ModelError> {
        if s.trim().is_empty() {
            return Ok(Self::ALL_LINE_HAUL);
        }
        let mut set = Self::EMPTY;
        for part in s.split('|') {
            let mode: Mode = part.parse()?;
            if !mode.is_line_haul() {
                return Err(ModelError::UnknownName {
                    kind: "line-haul mode",
                    value: part.to_string(),
                });
            }
            set.insert(mode);
        }
        Ok(set)
    }
}

impl fmt::Display for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(Mode::as_str).collect();
        f.write_str(&names.join("|"))
    }
}

impl fmt::Debug for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<Mode> for ModeSet {
    fn from_iter<I: IntoIterator<Item = Mode>>(iter: I) -> Self {
        let mut set = ModeSet::EMPTY;
        for m in iter {
            set.insert(m);
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geopoint_rejects_out_of_range() {
        assert!(GeoPoint::new(-180.0, 90.0).is_ok());
        assert_eq!(GeoPoint::new(180.5, 0.0), Err(ModelError::Longitude(180.5)));
        assert_eq!(GeoPoint::new(0.0, -91.0), Err(ModelError::Latitude(-91.0)));
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn mode_set_never_holds_truck() {
        let set: ModeSet = [Mode::Truck, Mode::Rail].into_iter().collect();
        assert!(!set.contains(Mode::Truck));
        assert!(set.contains(Mode::Rail));
        assert_eq!(set.to_string(), "rail");
        assert!(ModeSet::parse_list("truck").is_err());
    }

    #[test]
    fn mode_set_parse_list() {
        assert_eq!(ModeSet::parse_list("").unwrap(), ModeSet::ALL_LINE_HAUL);
        let s = ModeSet::parse_list("Water|pipeline").unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![Mode::Pipeline, Mode::Water]);
        assert!(ModeSet::parse_list("rail|boat").is_err());
    }
}
