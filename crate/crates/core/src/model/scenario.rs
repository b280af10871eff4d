//! Scenario configuration and its flat `key=value` file format.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EconomicParams, Mode};
use crate::error::{ModelError, ScenarioError};

/// Source-sink matching rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    /// Most profitable connection in the first profitable year.
    Mpfy,
    /// Most profitable connection over all admissible years.
    Mpay,
    /// Shortest total distance in the first profitable year.
    Sdfy,
    /// Shortest total distance over all admissible years.
    Sday,
    /// Shortest access (first + last leg) distance over all admissible years.
    Acay,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Mpfy,
        Algorithm::Mpay,
        Algorithm::Sdfy,
        Algorithm::Sday,
        Algorithm::Acay,
    ];

    /// True for the rules that look ahead to future route availability.
    pub fn looks_ahead(self) -> bool {
        !matches!(self, Algorithm::Mpfy | Algorithm::Sdfy)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Mpfy => "MPFY",
            Algorithm::Mpay => "MPAY",
            Algorithm::Sdfy => "SDFY",
            Algorithm::Sday => "SDAY",
            Algorithm::Acay => "ACAY",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ModelError::UnknownName {
                kind: "algorithm",
                value: s.to_string(),
            })
    }
}

/// Locations of the scenario's input tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InputPaths {
    pub sources: Option<PathBuf>,
    pub sinks: Option<PathBuf>,
    /// Node and edge tables, indexed Pipeline, Rail, Water.
    pub network_nodes: [Option<PathBuf>; 3],
    pub network_edges: [Option<PathBuf>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub first_year: i32,
    pub last_admission_year: i32,
    pub horizon_end: i32,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub capture_fraction_range: (f64, f64),
    pub econ: EconomicParams,
    pub paths: InputPaths,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            first_year: 2025,
            last_admission_year: 2032,
            horizon_end: 2043,
            algorithm: Algorithm::Mpay,
            seed: 42,
            capture_fraction_range: (0.90, 1.00),
            econ: EconomicParams::default(),
            paths: InputPaths::default(),
        }
    }
}

/// One failed invariant of a scenario configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ScenarioConfig {
    /// Every violated invariant, in a fixed order. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |field: &str, message: String| {
            out.push(Violation {
                field: field.to_string(),
                message,
            })
        };
        let e = &self.econ;

        if self.first_year > self.last_admission_year {
            bad(
                "last_admission_year",
                format!(
                    "{} precedes first_year {}",
                    self.last_admission_year, self.first_year
                ),
            );
        }
        let min_horizon = (self.last_admission_year + 1)
            .max(self.last_admission_year + e.credit_years as i32 - 1);
        if self.horizon_end < min_horizon {
            bad(
                "horizon_end",
                format!(
                    "{} is too short: must be at least {} (last_admission_year + credit_years - 1)",
                    self.horizon_end, min_horizon
                ),
            );
        }
        let (lo, hi) = self.capture_fraction_range;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            bad(
                "capture_fraction_range",
                format!("[{lo}, {hi}] must satisfy 0 < lo <= hi <= 1"),
            );
        }
        if !(0.0..=1.0).contains(&e.share_to_supply) {
            bad(
                "share_to_supply",
                format!("{} outside [0, 1]", e.share_to_supply),
            );
        }
        if e.credit_years == 0 {
            bad("credit_years", "must be at least 1".to_string());
        }
        if e.mandated_years < e.credit_years {
            bad(
                "mandated_years",
                format!(
                    "{} is less than credit_years {}",
                    e.mandated_years, e.credit_years
                ),
            );
        }
        let nonneg = [
            ("revenue_storage_non_dac", e.revenue.storage_non_dac),
            ("revenue_storage_dac", e.revenue.storage_dac),
            ("revenue_utilization_non_dac", e.revenue.utilization_non_dac),
            ("revenue_utilization_dac", e.revenue.utilization_dac),
            ("rate_pipeline", e.transport_rate.pipeline),
            ("rate_rail", e.transport_rate.rail),
            ("rate_water", e.transport_rate.water),
            ("rate_truck", e.transport_rate.truck),
            ("capex_pipeline_per_mile", e.capex_pipeline_per_mile),
            ("capex_rail_per_mile", e.capex_rail_per_mile),
            ("capex_water_terminal_per_tonne", e.capex_water_terminal_per_tonne),
            ("terminal_buffer_days", e.terminal_buffer_days),
            ("storage_cost_default", e.storage_cost_default),
        ];
        for (field, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                bad(field, format!("{v} must be a finite value >= 0"));
            }
        }
        let m = &e.multipliers;
        let positive = [
            ("multiplier_capture", m.capture),
            ("multiplier_storage", m.storage),
            ("multiplier_pipeline", m.pipeline),
            ("multiplier_rail", m.rail),
            ("multiplier_water", m.water),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bad(field, format!("{v} must be a finite value > 0"));
            }
        }
        out
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base)
    }

    /// Parses scenario text. Relative input paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ScenarioError> {
        let mut cfg = ScenarioConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ScenarioError::Syntax {
                line,
                message: format!("expected key=value, got `{content}`"),
            })?;
            cfg.set(key.trim(), value.trim(), base)
                .map_err(|err| match err {
                    SetError::Unknown => ScenarioError::UnknownKey {
                        line,
                        key: key.trim().to_string(),
                    },
                    SetError::Value(message) => ScenarioError::Value {
                        line,
                        key: key.trim().to_string(),
                        message,
                    },
                })?;
        }
        Ok(cfg)
    }

    /// Sets one key as read from a scenario file.
    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), SetError> {
        fn num<T: FromStr>(v: &str) -> Result<T, SetError>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map_err(|e| SetError::Value(e.to_string()))
        }
        let path = |v: &str| -> Option<PathBuf> {
            if v.is_empty() {
                None
            } else {
                Some(base.join(v))
            }
        };
        let e = &mut self.econ;
        match key {
            "first_year" => self.first_year = num(value)?,
            "last_admission_year" => self.last_admission_year = num(value)?,
            "horizon_end" => self.horizon_end = num(value)?,
            "algorithm" => {
                self.algorithm = value.parse().map_err(|e: ModelError| SetError::Value(e.to_string()))?
            }
            "seed" => self.seed = num(value)?,
            "capture_fraction_range" => {
                let (lo, hi) = value
                    .split_once(',')
                    .ok_or_else(|| SetError::Value("expected `lo,hi`".to_string()))?;
                self.capture_fraction_range = (num(lo.trim())?, num(hi.trim())?);
            }
            "share_to_supply" => e.share_to_supply = num(value)?,
            "credit_years" => e.credit_years = num(value)?,
            "mandated_years" => e.mandated_years = num(value)?,
            "revenue_storage_non_dac" => e.revenue.storage_non_dac = num(value)?,
            "revenue_storage_dac" => e.revenue.storage_dac = num(value)?,
            "revenue_utilization_non_dac" => e.revenue.utilization_non_dac = num(value)?,
            "revenue_utilization_dac" => e.revenue.utilization_dac = num(value)?,
            "rate_pipeline" => e.transport_rate.pipeline = num(value)?,
            "rate_rail" => e.transport_rate.rail = num(value)?,
            "rate_water" => e.transport_rate.water = num(value)?,
            "rate_truck" => e.transport_rate.truck = num(value)?,
            "capex_pipeline_per_mile" => e.capex_pipeline_per_mile = num(value)?,
            "capex_rail_per_mile" => e.capex_rail_per_mile = num(value)?,
            "capex_water_terminal_per_tonne" => e.capex_water_terminal_per_tonne = num(value)?,
            "terminal_buffer_days" => e.terminal_buffer_days = num(value)?,
            "terminal_count" => e.terminal_count = num(value)?,
            "storage_cost_default" => e.storage_cost_default = num(value)?,
            "multiplier_capture" => e.multipliers.capture = num(value)?,
            "multiplier_storage" => e.multipliers.storage = num(value)?,
            "multiplier_pipeline" => e.multipliers.pipeline = num(value)?,
            "multiplier_rail" => e.multipliers.rail = num(value)?,
            "multiplier_water" => e.multipliers.water = num(value)?,
            "sources" => self.paths.sources = path(value),
            "sinks" => self.paths.sinks = path(value),
            _ => {
                let (mode, kind) = key.split_once('_').ok_or(SetError::Unknown)?;
                let mode: Mode = mode.parse().map_err(|_| SetError::Unknown)?;
                if !mode.is_line_haul() {
                    return Err(SetError::Unknown);
                }
                match kind {
                    "nodes" => self.paths.network_nodes[mode.index()] = path(value),
                    "edges" => self.paths.network_edges[mode.index()] = path(value),
                    _ => return Err(SetError::Unknown),
                }
            }
        }
        Ok(())
    }

    /// Renders the configuration in the scenario file format. Paths are
    /// written as given; callers wanting portable files should store
    /// paths relative to the file's directory.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let e = &self.econ;
        let m = &e.multipliers;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("first_year", self.first_year.to_string());
        kv("last_admission_year", self.last_admission_year.to_string());
        kv("horizon_end", self.horizon_end.to_string());
        kv("algorithm", self.algorithm.to_string());
        kv("seed", self.seed.to_string());
        kv(
            "capture_fraction_range",
            format!("{},{}", self.capture_fraction_range.0, self.capture_fraction_range.1),
        );
        kv("share_to_supply", e.share_to_supply.to_string());
        kv("credit_years", e.credit_years.to_string());
        kv("mandated_years", e.mandated_years.to_string());
        kv("revenue_storage_non_dac", e.revenue.storage_non_dac.to_string());
        kv("revenue_storage_dac", e.revenue.storage_dac.to_string());
        kv("revenue_utilization_non_dac", e.revenue.utilization_non_dac.to_string());
        kv("revenue_utilization_dac", e.revenue.utilization_dac.to_string());
        kv("rate_pipeline", e.transport_rate.pipeline.to_string());
        kv("rate_rail", e.transport_rate.rail.to_string());
        kv("rate_water", e.transport_rate.water.to_string());
        kv("rate_truck", e.transport_rate.truck.to_string());
        kv("capex_pipeline_per_mile", e.capex_pipeline_per_mile.to_string());
        kv("capex_rail_per_mile", e.capex_rail_per_mile.to_string());
        kv("capex_water_terminal_per_tonne", e.capex_water_terminal_per_tonne.to_string());
        kv("terminal_buffer_days", e.terminal_buffer_days.to_string());
        kv("terminal_count", e.terminal_count.to_string());
        kv("storage_cost_default", e.storage_cost_default.to_string());
        kv("multiplier_capture", m.capture.to_string());
        kv("multiplier_storage", m.storage.to_string());
        kv("multiplier_pipeline", m.pipeline.to_string());
        kv("multiplier_rail", m.rail.to_string());
        kv("multiplier_water", m.water.to_string());
        let p = |o: &Option<PathBuf>| o.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        kv("sources", p(&self.paths.sources));
        kv("sinks", p(&self.paths.sinks));
        for mode in Mode::LINE_HAUL {
            kv(&format!("{mode}_nodes"), p(&self.paths.network_nodes[mode.index()]));
            kv(&format!("{mode}_edges"), p(&self.paths.network_edges[mode.index()]));
        }
        s
    }
}

enum SetError {
    Unknown,
    Value(String),
}
