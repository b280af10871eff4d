use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{GeoPoint, ModeSet};
use crate::error::ModelError;

/// Stationary CO2 source categories with their capture-cost ranges and the
/// national inventory counts used as the default synthetic type mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SourceType {
    Powerplant,
    Beccs,
    PetroNg,
    Refinery,
    Chemicals,
    Other,
    Cement,
    IronSteel,
    Minerals,
    Petrochemicals,
    PulpPaper,
    Hydrogen,
    Waste,
    Metals,
    Dac,
}

struct SourceInfo {
    name: &'static str,
    aliases: &'static [&'static str],
    cost: (f64, f64),
    count: u32,
    mtpa: f64,
    share_pct: f64,
}

const SOURCE_INFO: [SourceInfo; 15] = [
    SourceInfo { name: "Powerplant", aliases: &["Power Plant"], cost: (50.0, 100.0), count: 1158, mtpa: 1476.8, share_pct: 52.1 },
    SourceInfo { name: "BECCS", aliases: &["Bioenergy with Carbon Capture and Storage"], cost: (55.0, 60.0), count: 80, mtpa: 502.7, share_pct: 17.7 },
    SourceInfo { name: "PetroNG", aliases: &["Petro & NG Systems"], cost: (15.0, 25.0), count: 1804, mtpa: 231.8, share_pct: 8.2 },
    SourceInfo { name: "Refinery", aliases: &[], cost: (15.0, 25.0), count: 133, mtpa: 181.6, share_pct: 6.4 },
    SourceInfo { name: "Chemicals", aliases: &[], cost: (15.0, 25.0), count: 275, mtpa: 91.0, share_pct: 3.2 },
    SourceInfo { name: "Other", aliases: &[], cost: (15.0, 25.0), count: 1043, mtpa: 76.2, share_pct: 2.7 },
    SourceInfo { name: "Cement", aliases: &[], cost: (60.0, 120.0), count: 91, mtpa: 66.2, share_pct: 2.3 },
    SourceInfo { name: "IronSteel", aliases: &["Iron & Steel"], cost: (40.0, 100.0), count: 119, mtpa: 62.3, share_pct: 2.2 },
    SourceInfo { name: "Minerals", aliases: &[], cost: (15.0, 25.0), count: 273, mtpa: 42.6, share_pct: 1.5 },
    SourceInfo { name: "Petrochemicals", aliases: &[], cost: (15.0, 25.0), count: 56, mtpa: 40.2, share_pct: 1.4 },
    SourceInfo { name: "PulpPaper", aliases: &["Pulp & Paper"], cost: (40.0, 100.0), count: 218, mtpa: 34.4, share_pct: 1.2 },
    SourceInfo { name: "Hydrogen", aliases: &[], cost: (50.0, 80.0), count: 37, mtpa: 15.5, share_pct: 0.5 },
    SourceInfo { name: "Waste", aliases: &[], cost: (40.0, 100.0), count: 79, mtpa: 14.0, share_pct: 0.5 },
    SourceInfo { name: "Metals", aliases: &[], cost: (40.0, 100.0), count: 154, mtpa: 13.1, share_pct: 0.5 },
    SourceInfo { name: "DAC", aliases: &["Direct Air Capture"], cost: (134.0, 342.0), count: 24, mtpa: 6.3, share_pct: 0.2 },
];

impl SourceType {
    pub const ALL: [SourceType; 15] = [
        SourceType::Powerplant,
        SourceType::Beccs,
        SourceType::PetroNg,
        SourceType::Refinery,
        SourceType::Chemicals,
        SourceType::Other,
        SourceType::Cement,
        SourceType::IronSteel,
        SourceType::Minerals,
        SourceType::Petrochemicals,
        SourceType::PulpPaper,
        SourceType::Hydrogen,
        SourceType::Waste,
        SourceType::Metals,
        SourceType::Dac,
    ];

    fn info(self) -> &'static SourceInfo {
        &SOURCE_INFO[self as usize]
    }

    /// Canonical name used in CSV files.
    pub fn name(self) -> &'static str {
        self.info().name
    }

    /// Uniform capture-cost range in USD per tonne.
    pub fn capture_cost_range(self) -> (f64, f64) {
        self.info().cost
    }

    pub fn is_dac(self) -> bool {
        self == SourceType::Dac
    }

    /// Number of facilities in the reference national inventory.
    pub fn inventory_count(self) -> u32 {
        self.info().count
    }

    /// Reference annual CO2 quantity in million tonnes.
    pub fn inventory_mtpa(self) -> f64 {
        self.info().mtpa
    }

    /// Share of reference national CO2 supply, in percent.
    pub fn supply_share_pct(self) -> f64 {
        self.info().share_pct
    }

    /// Mean facility size in the reference inventory, tonnes per year.
    pub fn mean_facility_tonnes(self) -> f64 {
        self.inventory_mtpa() * 1e6 / f64::from(self.inventory_count())
    }
}

impl fmt::Display for SourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        SourceType::ALL
            .into_iter()
            .find(|t| t.info().name == s || t.info().aliases.contains(&s))
            .ok_or_else(|| ModelError::UnknownName {
                kind: "source type",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SinkCategory {
    Storage,
    Utilization,
}

impl SinkCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            SinkCategory::Storage => "storage",
            SinkCategory::Utilization => "utilization",
        }
    }
}

impl fmt::Display for SinkCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SinkCategory {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "storage" => Ok(SinkCategory::Storage),
            "utilization" | "utilisation" => Ok(SinkCategory::Utilization),
            _ => Err(ModelError::UnknownName {
                kind: "sink category",
                value: s.to_string(),
            }),
        }
    }
}

/// Sink capacity in tonnes (per year or in total).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Capacity {
    Finite(f64),
    Unlimited,
}

impl Capacity {
    pub fn admits(self, tonnes: f64) -> bool {
        match self {
            Capacity::Finite(c) => tonnes <= c,
            Capacity::Unlimited => true,
        }
    }

    pub fn consume(&mut self, tonnes: f64) {
        if let Capacity::Finite(c) = self {
            *c -= tonnes;
        }
    }

    pub fn release(&mut self, tonnes: f64) {
        if let Capacity::Finite(c) = self {
            *c += tonnes;
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => write!(f, "{c}"),
            Capacity::Unlimited => f.write_str("inf"),
        }
    }
}

/// Supply-agent lifecycle. Agents only ever move forward through the states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentState {
    Waiting,
    Selecting,
    Connected,
    Complete,
}

impl AgentState {
    pub fn next(self) -> Option<AgentState> {
        match self {
            AgentState::Waiting => Some(AgentState::Selecting),
            AgentState::Selecting => Some(AgentState::Connected),
            AgentState::Connected => Some(AgentState::Complete),
            AgentState::Complete => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplyAgent {
    pub id: String,
    pub source_type: SourceType,
    pub location: GeoPoint,
    /// Gross CO2 available per year, tonnes.
    pub annual_tonnes: f64,
    /// `None` until assigned; a value loaded from file is kept as is.
    pub start_year: Option<i32>,
    pub capture_fraction: f64,
    /// USD per tonne, drawn once per replication.
    pub capture_cost: f64,
    pub allowed_modes: ModeSet,
    pub state: AgentState,
}

impl SupplyAgent {
    pub fn new(id: impl Into<String>, source_type: SourceType, location: GeoPoint, annual_tonnes: f64) -> Self {
        Self {
            id: id.into(),
            source_type,
            location,
            annual_tonnes,
            start_year: None,
            capture_fraction: 1.0,
            capture_cost: 0.0,
            allowed_modes: ModeSet::ALL_LINE_HAUL,
            state: AgentState::Waiting,
        }
    }

    /// Tonnes moved per year once connected.
    pub fn captured_tonnes(&self) -> f64 {
        self.annual_tonnes * self.capture_fraction
    }

    pub fn advance(&mut self, to: AgentState) -> Result<(), ModelError> {
        if self.state.next() != Some(to) {
            return Err(ModelError::Transition {
                id: self.id.clone(),
                from: self.state,
                to,
            });
        }
        self.state = to;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandAgent {
    pub id: String,
    pub category: SinkCategory,
    /// Free-form subtype, e.g. `geologic`, `urea`, `food-and-beverage`, `eor`.
    pub sink_type: String,
    pub location: GeoPoint,
    /// Operating cost borne by the sink, USD per tonne.
    pub cost_per_tonne: f64,
    pub annual_capacity: Capacity,
    pub total_capacity: Capacity,
    pub available_year: i32,
    pub end_year: Option<i32>,
    pub allowed_modes: ModeSet,
}

impl DemandAgent {
    pub fn new(id: impl Into<String>, category: SinkCategory, location: GeoPoint, available_year: i32) -> Self {
        Self {
            id: id.into(),
            category,
            sink_type: match category {
                SinkCategory::Storage => "geologic".to_string(),
                SinkCategory::Utilization => "other-ccu".to_string(),
            },
            location,
            cost_per_tonne: 0.0,
            annual_capacity: Capacity::Unlimited,
            total_capacity: Capacity::Unlimited,
            available_year,
            end_year: None,
            allowed_modes: ModeSet::ALL_LINE_HAUL,
        }
    }

    pub fn is_food_grade(&self) -> bool {
        let t: String = self
            .sink_type
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        t == "foodandbeverage" || t == "foodbeverage"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_names_round_trip() {
        for t in SourceType::ALL {
            assert_eq!(t.name().parse::<SourceType>().unwrap(), t);
        }
        assert_eq!("Power Plant".parse::<SourceType>().unwrap(), SourceType::Powerplant);
        assert_eq!("Direct Air Capture".parse::<SourceType>().unwrap(), SourceType::Dac);
        assert!("Powerplants".parse::<SourceType>().is_err());
    }

    #[test]
    fn inventory_totals_match_reference_table() {
        let count: u32 = SourceType::ALL.iter().map(|t| t.inventory_count()).sum();
        let mtpa: f64 = SourceType::ALL.iter().map(|t| t.inventory_mtpa()).sum();
        assert_eq!(count, 5544);
        // the per-type rows are rounded to 0.1 and add up to 2854.7 against a stated 2854.6
        assert!((mtpa - 2854.7).abs() < 1e-9);
    }

    #[test]
    fn lifecycle_only_moves_forward() {
        let p = GeoPoint::new(0.0, 0.0).unwrap();
        let mut a = SupplyAgent::new("S1", SourceType::Cement, p, 1.0);
        assert!(a.advance(AgentState::Connected).is_err());
        a.advance(AgentState::Selecting).unwrap();
        a.advance(AgentState::Connected).unwrap();
        assert!(a.advance(AgentState::Selecting).is_err());
        a.advance(AgentState::Complete).unwrap();
        assert!(a.advance(AgentState::Complete).is_err());
    }

    #[test]
    fn food_grade_detection() {
        let p = GeoPoint::new(0.0, 0.0).unwrap();
        let mut d = DemandAgent::new("D", SinkCategory::Utilization, p, 2025);
        d.sink_type = "Food-and-Beverage".into();
        assert!(d.is_food_grade());
        d.sink_type = "urea".into();
        assert!(!d.is_food_grade());
    }
}
