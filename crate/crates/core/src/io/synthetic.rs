//! Seeded random scenarios for testing and benchmarking.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::output::{write_edges, write_nodes, write_sinks, write_sources};
use crate::engine::Scenario;
use crate::error::{Error, Result};
use crate::geo::{great_circle_miles, Edge, ModeNetwork, Networks, Node};
use crate::model::{Capacity, DemandAgent, GeoPoint, Mode, ModeSet, ScenarioConfig, SinkCategory, SourceType, SupplyAgent};
use crate::rng::{substream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    /// Contiguous United States.
    pub const CONUS: BBox = BBox {
        min_lon: -124.0,
        min_lat: 25.0,
        max_lon: -67.0,
        max_lat: 49.0,
    };

    fn validate(&self) -> Result<()> {
        let ok = self.min_lon < self.max_lon
            && self.min_lat < self.max_lat
            && GeoPoint::new(self.min_lon, self.min_lat).is_ok()
            && GeoPoint::new(self.max_lon, self.max_lat).is_ok();
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("degenerate bounding box {self:?}")))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> GeoPoint {
        let lon = round4(rng.random_range(self.min_lon..self.max_lon));
        let lat = round4(rng.random_range(self.min_lat..self.max_lat));
        GeoPoint::new(lon, lat).expect("inside a validated box")
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub n_sources: usize,
    pub n_sinks: usize,
    pub bbox: BBox,
    /// Relative weights; `None` uses national supply shares.
    pub type_mix: Option<Vec<(SourceType, f64)>>,
    pub seed: u64,
    pub first_year: i32,
    pub rail_nodes: usize,
    /// Water grid columns and rows.
    pub water_grid: (usize, usize),
    pub pipeline_nodes: usize,
    /// Pipeline nodes appear at one of these years; the first is the build-out start.
    pub pipeline_epochs: Vec<i32>,
    /// Fraction of sinks that are utilization sites.
    pub utilization_share: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            n_sources: 200,
            n_sinks: 20,
            bbox: BBox::CONUS,
            type_mix: None,
            seed: 1,
            first_year: 2025,
            rail_nodes: 400,
            water_grid: (12, 6),
            pipeline_nodes: 120,
            pipeline_epochs: vec![2025, 2030, 2035, 2040],
            utilization_share: 0.3,
        }
    }
}

/// A generated scenario held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub sources: Vec<SupplyAgent>,
    pub sinks: Vec<DemandAgent>,
    /// Indexed pipeline, rail, water.
    pub nodes: [Vec<Node>; 3],
    pub edges: [Vec<Edge>; 3],
}

const UTILIZATION_TYPES: [&str; 4] = ["urea", "food-and-beverage", "eor", "other-ccu"];

impl SyntheticScenario {
    pub fn networks(&self) -> Result<Networks> {
        let mut nets = Networks::new();
        for mode in Mode::LINE_HAUL {
            let i = mode.index();
            if !self.nodes[i].is_empty() {
                nets.insert(ModeNetwork::new(mode, self.nodes[i].clone(), self.edges[i].clone())?);
            }
        }
        Ok(nets)
    }

    /// Builds an in-memory scenario under `cfg`; input paths are ignored.
    pub fn to_scenario(&self, cfg: &ScenarioConfig) -> Result<Scenario> {
        Scenario::new(cfg.clone(), self.sources.clone(), self.sinks.clone(), self.networks()?)
    }

    /// Writes the CSVs and a `scenario.txt` that references them by
    /// relative path. Returns the scenario file path.
    pub fn write(&self, dir: &Path, cfg: &ScenarioConfig) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::output(dir, e))?;
        let mut cfg = cfg.clone();
        write_sources(&dir.join("sources.csv"), &self.sources)?;
        write_sinks(&dir.join("sinks.csv"), &self.sinks)?;
        cfg.paths.sources = Some("sources.csv".into());
        cfg.paths.sinks = Some("sinks.csv".into());
        for mode in Mode::LINE_HAUL {
            let i = mode.index();
            let (n, e) = (format!("{mode}_nodes.csv"), format!("{mode}_edges.csv"));
            write_nodes(&dir.join(&n), &self.nodes[i])?;
            write_edges(&dir.join(&e), &self.edges[i])?;
            cfg.paths.network_nodes[i] = Some(n.into());
            cfg.paths.network_edges[i] = Some(e.into());
        }
        let path = dir.join("scenario.txt");
        fs::write(&path, cfg.to_file_string()).map_err(|e| Error::output(&path, e))?;
        Ok(path)
    }
}

fn node(prefix: &str, k: usize, location: GeoPoint, year: i32) -> Node {
    Node {
        id: Arc::from(format!("{prefix}{k:04}")),
        location,
        available_year: year,
    }
}

/// Connects every node to its nearest predecessor (a spanning tree) and
/// additionally to its `extra` nearest other nodes.
fn proximity_edges(nodes: &[Node], extra: usize, circuity: f64) -> Vec<Edge> {
    let mut pairs = std::collections::BTreeSet::new();
    let dist = |a: usize, b: usize| great_circle_miles(nodes[a].location, nodes[b].location);
    for i in 1..nodes.len() {
        let j = (0..i).min_by(|&a, &b| dist(i, a).total_cmp(&dist(i, b))).expect("i > 0");
        pairs.insert((j.min(i), j.max(i)));
    }
    for i in 0..nodes.len() {
        let mut others: Vec<usize> = (0..nodes.len()).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| dist(i, a).total_cmp(&dist(i, b)).then(a.cmp(&b)));
        for &j in others.iter().take(extra) {
            pairs.insert((j.min(i), j.max(i)));
        }
    }
    pairs
        .into_iter()
        .filter(|&(a, b)| dist(a, b) > 0.0)
        .map(|(a, b)| Edge {
            from: nodes[a].id.to_string(),
            to: nodes[b].id.to_string(),
            miles: Some((dist(a, b) * circuity * 1e3).round() / 1e3),
            available_year: nodes[a].available_year.max(nodes[b].available_year),
        })
        .collect()
}

/// Generates sources, sinks and three networks inside `params.bbox`.
///
/// Rail is a proximity graph over random nodes, water is a regular grid,
/// and pipeline nodes are stamped with random build-out epochs. Supply
/// start years are left blank so each replication draws them.
pub fn generate_synthetic_scenario(params: &SyntheticParams) -> Result<SyntheticScenario> {
    params.bbox.validate()?;
    if !(0.0..=1.0).contains(&params.utilization_share) {
        return Err(Error::Invalid("utilization share must lie in [0, 1]".into()));
    }
    let stream = |label: &str| substream(params.seed, label, Purpose::Synthetic);

    let mix: Vec<(SourceType, f64)> = match &params.type_mix {
        Some(m) => m.clone(),
        None => SourceType::ALL.iter().map(|&t| (t, t.supply_share_pct())).collect(),
    };
    let weights = WeightedIndex::new(mix.iter().map(|m| m.1))
        .map_err(|e| Error::Invalid(format!("bad type mix: {e}")))?;

    let mut rng = stream("sources");
    let sources = (0..params.n_sources)
        .map(|k| {
            let t = mix[weights.sample(&mut rng)].0;
            let location = params.bbox.sample(&mut rng);
            let tonnes = (t.mean_facility_tonnes() * rng.random_range(0.5..1.5)).round().max(1.0);
            SupplyAgent::new(format!("S{k:05}"), t, location, tonnes)
        })
        .collect();

    let mut rng = stream("sinks");
    let sinks = (0..params.n_sinks)
        .map(|k| {
            let location = params.bbox.sample(&mut rng);
            let utilization = rng.random::<f64>() < params.utilization_share;
            let category = if utilization { SinkCategory::Utilization } else { SinkCategory::Storage };
            let mut d = DemandAgent::new(format!("D{k:04}"), category, location, params.first_year);
            if utilization {
                d.sink_type = UTILIZATION_TYPES[rng.random_range(0..UTILIZATION_TYPES.len())].to_string();
                d.cost_per_tonne = round4(rng.random_range(2.0..12.0));
                if d.is_food_grade() {
                    d.allowed_modes = ModeSet::ALL_LINE_HAUL;
                    d.allowed_modes.remove(Mode::Pipeline);
                }
            } else {
                d.cost_per_tonne = 10.0;
            }
            d.annual_capacity = Capacity::Unlimited;
            d.total_capacity = Capacity::Unlimited;
            d
        })
        .collect();

    let mut rng = stream("rail");
    let rail: Vec<Node> = (0..params.rail_nodes)
        .map(|k| node("R", k, params.bbox.sample(&mut rng), params.first_year))
        .collect();
    let rail_edges = proximity_edges(&rail, 2, 1.2);

    let (cols, rows) = params.water_grid;
    let b = params.bbox;
    let mut water = Vec::with_capacity(cols * rows);
    let mut water_edges = Vec::new();
    let step = |lo: f64, hi: f64, n: usize, i: usize| {
        if n <= 1 {
            (lo + hi) / 2.0
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    for r in 0..rows {
        for c in 0..cols {
            let p = GeoPoint::new(round4(step(b.min_lon, b.max_lon, cols, c)), round4(step(b.min_lat, b.max_lat, rows, r)))
                .expect("inside a validated box");
            water.push(node("W", r * cols + c, p, params.first_year));
            let id = |r: usize, c: usize| format!("W{:04}", r * cols + c);
            if c > 0 {
                water_edges.push(edge(id(r, c - 1), id(r, c), params.first_year));
            }
            if r > 0 {
                water_edges.push(edge(id(r - 1, c), id(r, c), params.first_year));
            }
        }
    }

    let mut rng = stream("pipeline");
    let epochs = if params.pipeline_epochs.is_empty() {
        vec![params.first_year]
    } else {
        params.pipeline_epochs.clone()
    };
    let growth = WeightedIndex::new((1..=epochs.len()).map(|w| w as f64)).expect("nonempty epochs");
    let pipeline: Vec<Node> = (0..params.pipeline_nodes)
        .map(|k| {
            let p = params.bbox.sample(&mut rng);
            // later epochs add more nodes than earlier ones
            let year = if k == 0 { epochs[0] } else { epochs[growth.sample(&mut rng)] };
            node("P", k, p, year.max(params.first_year))
        })
        .collect();
    let pipeline_edges = proximity_edges(&pipeline, 1, 1.0);

    Ok(SyntheticScenario {
        sources,
        sinks,
        nodes: [pipeline, rail, water],
        edges: [pipeline_edges, rail_edges, water_edges],
    })
}

fn edge(from: String, to: String, year: i32) -> Edge {
    Edge {
        from,
        to,
        miles: None,
        available_year: year,
    }
}
