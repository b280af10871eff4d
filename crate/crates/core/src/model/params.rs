use serde::{Deserialize, Serialize};

use super::{Mode, SinkCategory};

/// Per-tonne credit revenue by sink category and whether the source is DAC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueTable {
    pub storage_non_dac: f64,
    pub storage_dac: f64,
    pub utilization_non_dac: f64,
    pub utilization_dac: f64,
}

impl Default for RevenueTable {
    fn default() -> Self {
        Self {
            storage_non_dac: 85.0,
            storage_dac: 180.0,
            utilization_non_dac: 60.0,
            utilization_dac: 130.0,
        }
    }
}

impl RevenueTable {
    pub fn rate(&self, category: SinkCategory, source_is_dac: bool) -> f64 {
        match (category, source_is_dac) {
            (SinkCategory::Storage, false) => self.storage_non_dac,
            (SinkCategory::Storage, true) => self.storage_dac,
            (SinkCategory::Utilization, false) => self.utilization_non_dac,
            (SinkCategory::Utilization, true) => self.utilization_dac,
        }
    }
}

/// Operating cost per tonne-mile by carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportRates {
    pub pipeline: f64,
    pub rail: f64,
    pub water: f64,
    pub truck: f64,
}

impl Default for TransportRates {
    fn default() -> Self {
        Self {
            pipeline: 0.0161,
            rail: 0.0708,
            water: 0.0644,
            truck: 0.1770,
        }
    }
}

impl TransportRates {
    pub fn get(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Pipeline => self.pipeline,
            Mode::Rail => self.rail,
            Mode::Water => self.water,
            Mode::Truck => self.truck,
        }
    }
}

/// Scalars applied on top of the base cost inputs for sensitivity runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostMultipliers {
    pub capture: f64,
    pub storage: f64,
    pub pipeline: f64,
    pub rail: f64,
    pub water: f64,
}

impl Default for CostMultipliers {
    fn default() -> Self {
        Self {
            capture: 1.0,
            storage: 1.0,
            pipeline: 1.0,
            rail: 1.0,
            water: 1.0,
        }
    }
}

impl CostMultipliers {
    /// Multiplier for a carrier's costs. Truck access legs only occur on
    /// water routes and follow the water multiplier.
    pub fn transport(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Pipeline => self.pipeline,
            Mode::Rail => self.rail,
            Mode::Water | Mode::Truck => self.water,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicParams {
    pub revenue: RevenueTable,
    pub transport_rate: TransportRates,
    /// USD per mile of private spur pipeline (legs A and C).
    pub capex_pipeline_per_mile: f64,
    /// USD per mile of rail spur (legs A and C).
    pub capex_rail_per_mile: f64,
    /// USD per tonne of intermodal terminal buffer capacity.
    pub capex_water_terminal_per_tonne: f64,
    /// Days of throughput each water terminal must buffer.
    pub terminal_buffer_days: f64,
    /// Terminals charged per water route.
    pub terminal_count: u32,
    /// Geologic storage cost applied when a storage sink leaves it blank.
    pub storage_cost_default: f64,
    /// Fraction of credit revenue passed to the supply agent.
    pub share_to_supply: f64,
    /// Years during which credit revenue accrues.
    pub credit_years: u32,
    /// Years a connected pair must keep operating.
    pub mandated_years: u32,
    pub multipliers: CostMultipliers,
}

impl Default for EconomicParams {
    fn default() -> Self {
        Self {
            revenue: RevenueTable::default(),
            transport_rate: TransportRates::default(),
            capex_pipeline_per_mile: 784_198.0,
            capex_rail_per_mile: 2_000_000.0,
            capex_water_terminal_per_tonne: 4_585.1,
            terminal_buffer_days: 7.0,
            terminal_count: 2,
            storage_cost_default: 10.0,
            share_to_supply: 0.75,
            credit_years: 12,
            mandated_years: 12,
            multipliers: CostMultipliers::default(),
        }
    }
}

impl EconomicParams {
    pub fn revenue_rate(&self, category: SinkCategory, source_is_dac: bool) -> f64 {
        self.revenue.rate(category, source_is_dac)
    }

    /// Operating rate for a carrier after its multiplier.
    pub fn effective_rate(&self, mode: Mode) -> f64 {
        self.transport_rate.get(mode) * self.multipliers.transport(mode)
    }
}
