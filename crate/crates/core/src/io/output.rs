use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::engine::{PerMode, ReplicationResult};
use crate::error::{Error, Result};
use crate::geo::{Edge, Node};
use crate::model::{DemandAgent, Mode, SupplyAgent};
use crate::stats::Stat;

/// Shortest text that parses back to the same `f64`.
pub fn format_num(v: f64) -> String {
    format!("{v}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let err = |e: csv::Error| {
        let source = match e.into_kind() {
            csv::ErrorKind::Io(io) => io,
            other => std::io::Error::other(format!("{other:?}")),
        };
        Error::output(path, source)
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::output(path, e))
}

pub fn write_sources(path: &Path, sources: &[SupplyAgent]) -> Result<()> {
    write_csv(
        path,
        &["id", "type", "lon", "lat", "annual_tonnes", "start_year", "allowed_modes"],
        sources.iter().map(|s| {
            vec![
                s.id.clone(),
                s.source_type.name().to_string(),
                format_num(s.location.lon()),
                format_num(s.location.lat()),
                format_num(s.annual_tonnes),
                opt(s.start_year),
                s.allowed_modes.to_string(),
            ]
        }),
    )
}

pub fn write_sinks(path: &Path, sinks: &[DemandAgent]) -> Result<()> {
    write_csv(
        path,
        &[
            "id",
            "category",
            "type",
            "lon",
            "lat",
            "cost_per_tonne",
            "annual_capacity",
            "total_capacity",
            "available_year",
            "end_year",
            "allowed_modes",
        ],
        sinks.iter().map(|d| {
            vec![
                d.id.clone(),
                d.category.as_str().to_string(),
                d.sink_type.clone(),
                format_num(d.location.lon()),
                format_num(d.location.lat()),
                format_num(d.cost_per_tonne),
                d.annual_capacity.to_string(),
                d.total_capacity.to_string(),
                d.available_year.to_string(),
                opt(d.end_year),
                d.allowed_modes.to_string(),
            ]
        }),
    )
}

pub fn write_nodes(path: &Path, nodes: &[Node]) -> Result<()> {
    write_csv(
        path,
        &["node_id", "lon", "lat", "available_year"],
        nodes.iter().map(|n| {
            vec![
                n.id.to_string(),
                format_num(n.location.lon()),
                format_num(n.location.lat()),
                n.available_year.to_string(),
            ]
        }),
    )
}

/// Writes edges as given at construction, blank miles included.
pub fn write_edges(path: &Path, edges: &[Edge]) -> Result<()> {
    write_csv(
        path,
        &["from", "to", "miles", "available_year"],
        edges.iter().map(|e| {
            vec![
                e.from.clone(),
                e.to.clone(),
                e.miles.map(format_num).unwrap_or_default(),
                e.available_year.to_string(),
            ]
        }),
    )
}

pub const CONNECTIONS_HEADER: [&str; 22] = [
    "supply_id",
    "demand_id",
    "mode",
    "entry_node",
    "exit_node",
    "leg_a_miles",
    "leg_b_miles",
    "leg_c_miles",
    "total_miles",
    "start_year",
    "end_year",
    "annual_tonnes",
    "lifetime_tonnes",
    "revenue_total",
    "supply_revenue",
    "demand_revenue",
    "capture_cost_total",
    "transport_op_total",
    "capex_total",
    "demand_cost_total",
    "supply_profit",
    "demand_profit",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceStats {
    pub total: Stat,
    pub ac: Stat,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total_tonnes: f64,
    pub tonnes_by_mode: PerMode,
    pub mode_shares: PerMode,
    pub distance_stats: DistanceStats,
    pub profit_per_tonne: f64,
    pub n_connections: usize,
    pub seed: u64,
}

impl Summary {
    pub fn of(result: &ReplicationResult) -> Self {
        let t = &result.totals;
        Self {
            total_tonnes: t.total_tonnes,
            tonnes_by_mode: t.tonnes_by_mode,
            mode_shares: t.mode_shares,
            distance_stats: DistanceStats {
                total: t.total_distance,
                ac: t.ac_distance,
            },
            profit_per_tonne: t.profit_per_tonne,
            n_connections: t.n_connections,
            seed: result.seed,
        }
    }
}

/// Writes `connections.csv`, `annual.csv` and `summary.json` into `dir`,
/// creating it if needed.
pub fn write_outputs(result: &ReplicationResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::output(dir, e))?;

    let mut conns: Vec<_> = result.connections.iter().collect();
    conns.sort_by(|a, b| a.supply_id.cmp(&b.supply_id));
    write_csv(
        &dir.join("connections.csv"),
        &CONNECTIONS_HEADER,
        conns.into_iter().map(|c| {
            let r = &c.route;
            let e = &c.evaluation;
            let mut row = vec![
                c.supply_id.to_string(),
                c.demand_id.to_string(),
                r.mode.to_string(),
                r.entry_node.to_string(),
                r.exit_node.to_string(),
            ];
            row.extend([r.leg_a_miles, r.leg_b_miles, r.leg_c_miles, r.total_miles()].map(format_num));
            row.push(c.start_year.to_string());
            row.push(c.end_year.to_string());
            row.extend(
                [
                    c.annual_tonnes_moved,
                    c.lifetime_tonnes(),
                    e.revenue_total,
                    e.supply_revenue,
                    e.demand_revenue,
                    e.capture_cost_total,
                    e.transport_op_total,
                    e.capex_total,
                    e.demand_cost_total,
                    e.supply_profit,
                    e.demand_profit,
                ]
                .map(format_num),
            );
            row
        }),
    )?;

    write_csv(
        &dir.join("annual.csv"),
        &["year", "mode", "tonnes"],
        result
            .annual_capture
            .iter()
            .filter(|(_, &t)| t != 0.0)
            .map(|(&(year, mode), &t): (&(i32, Mode), &f64)| vec![year.to_string(), mode.to_string(), format_num(t)]),
    )?;

    let path = dir.join("summary.json");
    let mut json = serde_json::to_string_pretty(&Summary::of(result)).map_err(|e| Error::output(&path, e.into()))?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::output(&path, e))
}
