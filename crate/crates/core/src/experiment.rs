//! Replication batches and one-factor sensitivity sweeps.
//!
//! Replication `i` of every batch uses `replication_seed(base_seed, i)`,
//! so all points of a sweep see the same random draws and differ only in
//! the swept parameter. Work runs on a rayon pool; results are ordered by
//! replication index before anything is aggregated or written.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{Engine, ReplicationResult, Totals};
use crate::error::{Error, Result};
use crate::io::{format_num, write_outputs};
use crate::model::{EconomicParams, Mode, ScenarioConfig};
use crate::rng::replication_seed;
use crate::stats::{describe, Stat};

/// Cross-replication statistics of each reported metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SummaryStats {
    pub total_tonnes: Stat,
    pub tonnes_pipeline: Stat,
    pub tonnes_rail: Stat,
    pub tonnes_water: Stat,
    pub share_pipeline: Stat,
    pub share_rail: Stat,
    pub share_water: Stat,
    pub total_distance_mean: Stat,
    pub total_distance_median: Stat,
    pub total_distance_std: Stat,
    pub ac_distance_mean: Stat,
    pub ac_distance_median: Stat,
    pub ac_distance_std: Stat,
    pub profit_per_tonne: Stat,
    pub n_connections: Stat,
}

impl SummaryStats {
    pub fn from_totals<'t>(totals: impl IntoIterator<Item = &'t Totals>) -> Self {
        let totals: Vec<&Totals> = totals.into_iter().collect();
        let col = |f: &dyn Fn(&Totals) -> f64| describe(&totals.iter().map(|t| f(t)).collect::<Vec<_>>());
        Self {
            total_tonnes: col(&|t| t.total_tonnes),
            tonnes_pipeline: col(&|t| t.tonnes_by_mode.get(Mode::Pipeline)),
            tonnes_rail: col(&|t| t.tonnes_by_mode.get(Mode::Rail)),
            tonnes_water: col(&|t| t.tonnes_by_mode.get(Mode::Water)),
            share_pipeline: col(&|t| t.mode_shares.get(Mode::Pipeline)),
            share_rail: col(&|t| t.mode_shares.get(Mode::Rail)),
            share_water: col(&|t| t.mode_shares.get(Mode::Water)),
            total_distance_mean: col(&|t| t.total_distance.mean),
            total_distance_median: col(&|t| t.total_distance.median),
            total_distance_std: col(&|t| t.total_distance.std),
            ac_distance_mean: col(&|t| t.ac_distance.mean),
            ac_distance_median: col(&|t| t.ac_distance.median),
            ac_distance_std: col(&|t| t.ac_distance.std),
            profit_per_tonne: col(&|t| t.profit_per_tonne),
            n_connections: col(&|t| t.n_connections as f64),
        }
    }

    /// Metric names and values in a fixed order.
    pub fn fields(&self) -> [(&'static str, Stat); 15] {
        [
            ("total_tonnes", self.total_tonnes),
            ("tonnes_pipeline", self.tonnes_pipeline),
            ("tonnes_rail", self.tonnes_rail),
            ("tonnes_water", self.tonnes_water),
            ("share_pipeline", self.share_pipeline),
            ("share_rail", self.share_rail),
            ("share_water", self.share_water),
            ("total_distance_mean", self.total_distance_mean),
            ("total_distance_median", self.total_distance_median),
            ("total_distance_std", self.total_distance_std),
            ("ac_distance_mean", self.ac_distance_mean),
            ("ac_distance_median", self.ac_distance_median),
            ("ac_distance_std", self.ac_distance_std),
            ("profit_per_tonne", self.profit_per_tonne),
            ("n_connections", self.n_connections),
        ]
    }

    /// CSV column names: `<metric>_mean`, `<metric>_median`, `<metric>_std`.
    pub fn columns() -> Vec<String> {
        SummaryStats::default()
            .fields()
            .iter()
            .flat_map(|(name, _)| ["mean", "median", "std"].map(|s| format!("{name}_{s}")))
            .collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.fields()
            .iter()
            .flat_map(|(_, s)| [s.mean, s.median, s.std])
            .collect()
    }
}

/// A replication batch: per-replication results in index order.
#[derive(Debug, Clone)]
pub struct Batch {
    pub summary: SummaryStats,
    pub results: Vec<ReplicationResult>,
}

/// Runs batches against one loaded scenario on a pool of `jobs` threads
/// (`None` for the machine's parallelism).
pub struct Runner<'a> {
    engine: Engine<'a>,
    pool: rayon::ThreadPool,
}

impl<'a> Runner<'a> {
    pub fn new(scenario: &'a crate::engine::Scenario, jobs: Option<usize>) -> Result<Self> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(j) = jobs {
            if j == 0 {
                return Err(Error::Invalid("jobs must be at least 1".into()));
            }
            builder = builder.num_threads(j);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            engine: Engine::new(scenario),
            pool,
        })
    }

    pub fn engine(&self) -> &Engine<'a> {
        &self.engine
    }

    /// `n` replications of `cfg` with seeds derived from `base_seed`.
    pub fn run_replications(&self, cfg: &ScenarioConfig, n: usize, base_seed: u64) -> Result<Batch> {
        if n == 0 {
            return Err(Error::Invalid("at least one replication is required".into()));
        }
        let results: Vec<ReplicationResult> = self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| self.engine.run(cfg, replication_seed(base_seed, i as u64)))
                .collect::<Result<_>>()
        })?;
        Ok(Batch {
            summary: SummaryStats::from_totals(results.iter().map(|r| &r.totals)),
            results,
        })
    }

    /// One batch per configuration, all sharing the same seeds. Only the
    /// totals of each replication are kept.
    fn run_grid(&self, cfgs: &[ScenarioConfig], n: usize, base_seed: u64) -> Result<Vec<Vec<Totals>>> {
        if n == 0 {
            return Err(Error::Invalid("at least one replication is required".into()));
        }
        let jobs: Vec<(usize, usize)> = (0..cfgs.len()).flat_map(|p| (0..n).map(move |i| (p, i))).collect();
        let flat: Vec<Totals> = self.pool.install(|| {
            jobs.par_iter()
                .map(|&(p, i)| {
                    self.engine
                        .run(&cfgs[p], replication_seed(base_seed, i as u64))
                        .map(|r| r.totals)
                })
                .collect::<Result<_>>()
        })?;
        Ok(flat.chunks(n).map(<[Totals]>::to_vec).collect())
    }

    fn sweep(&self, axis: &str, points: Vec<(f64, ScenarioConfig)>, n: usize, base_seed: u64) -> Result<SweepResult> {
        for w in points.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::Invalid(format!("{axis} values must be strictly increasing")));
            }
        }
        for (value, cfg) in &points {
            if let Some(v) = cfg.validate().first() {
                return Err(Error::Invalid(format!("{axis}={value}: {v}")));
            }
            log::info!("{axis}={value}: effective parameters {:?}", EffectiveParams::of(&cfg.econ));
        }
        let cfgs: Vec<ScenarioConfig> = points.iter().map(|p| p.1.clone()).collect();
        let totals = self.run_grid(&cfgs, n, base_seed)?;
        Ok(SweepResult {
            axis: axis.to_string(),
            points: points
                .into_iter()
                .zip(totals)
                .map(|((value, cfg), totals)| SweepPoint {
                    value,
                    summary: SummaryStats::from_totals(&totals),
                    effective: EffectiveParams::of(&cfg.econ),
                    totals,
                })
                .collect(),
        })
    }

    /// One sweep per target, each over `factors`.
    pub fn sweep_cost_multipliers(
        &self,
        cfg: &ScenarioConfig,
        factors: &[f64],
        targets: &[CostTarget],
        n: usize,
        base_seed: u64,
    ) -> Result<Vec<SweepResult>> {
        if let Some(f) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::Invalid(format!("cost multiplier must be positive, got {f}")));
        }
        targets
            .iter()
            .map(|&target| {
                let points = factors
                    .iter()
                    .map(|&f| {
                        let mut c = cfg.clone();
                        target.apply(&mut c.econ, f);
                        (f, c)
                    })
                    .collect();
                self.sweep(&format!("{target}_multiplier"), points, n, base_seed)
            })
            .collect()
    }

    /// Varies the mandated duration with credit accrual held at `credit_years`.
    pub fn sweep_mandated_duration(&self, cfg: &ScenarioConfig, years: &[u32], n: usize, base_seed: u64) -> Result<SweepResult> {
        let credit = cfg.econ.credit_years;
        if let Some(y) = years.iter().find(|&&y| y < credit) {
            return Err(Error::Invalid(format!("mandated duration {y} is shorter than the {credit} credit years")));
        }
        let points = years
            .iter()
            .map(|&y| {
                let mut c = cfg.clone();
                c.econ.mandated_years = y;
                (f64::from(y), c)
            })
            .collect();
        self.sweep("mandated_years", points, n, base_seed)
    }

    pub fn sweep_revenue_share(&self, cfg: &ScenarioConfig, shares: &[f64], n: usize, base_seed: u64) -> Result<SweepResult> {
        if let Some(s) = shares.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::Invalid(format!("revenue share {s} outside [0, 1]")));
        }
        let points = shares
            .iter()
            .map(|&s| {
                let mut c = cfg.clone();
                c.econ.share_to_supply = s;
                (s, c)
            })
            .collect();
        self.sweep("share_to_supply", points, n, base_seed)
    }
}

/// 0.2, 0.4, ..., 2.0
pub fn default_cost_grid() -> Vec<f64> {
    (1..=10).map(|k| f64::from(k) / 5.0).collect()
}

pub fn default_duration_grid() -> Vec<u32> {
    (12..=18).collect()
}

/// 0.50, 0.55, ..., 0.95
pub fn default_share_grid() -> Vec<f64> {
    (10..=19).map(|k| f64::from(k) / 20.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CostTarget {
    Capture,
    Storage,
    Pipeline,
    Rail,
    Water,
    AllTransport,
}

impl CostTarget {
    pub const ALL: [CostTarget; 6] = [
        CostTarget::Capture,
        CostTarget::Storage,
        CostTarget::Pipeline,
        CostTarget::Rail,
        CostTarget::Water,
        CostTarget::AllTransport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CostTarget::Capture => "capture",
            CostTarget::Storage => "storage",
            CostTarget::Pipeline => "pipeline",
            CostTarget::Rail => "rail",
            CostTarget::Water => "water",
            CostTarget::AllTransport => "all_transport",
        }
    }

    /// Sets the target's multiplier to `factor`, leaving the others alone.
    pub fn apply(self, econ: &mut EconomicParams, factor: f64) {
        let m = &mut econ.multipliers;
        match self {
            CostTarget::Capture => m.capture = factor,
            CostTarget::Storage => m.storage = factor,
            CostTarget::Pipeline => m.pipeline = factor,
            CostTarget::Rail => m.rail = factor,
            CostTarget::Water => m.water = factor,
            CostTarget::AllTransport => {
                m.pipeline = factor;
                m.rail = factor;
                m.water = factor;
            }
        }
    }
}

impl fmt::Display for CostTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostTarget::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Invalid(format!("unknown cost target `{s}`")))
    }
}

/// Operating rates and multipliers actually in force at a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveParams {
    pub rate_pipeline: f64,
    pub rate_rail: f64,
    pub rate_water: f64,
    pub rate_truck: f64,
    pub capture_multiplier: f64,
    pub storage_multiplier: f64,
    pub capex_pipeline_per_mile: f64,
    pub capex_rail_per_mile: f64,
    pub capex_water_terminal_per_tonne: f64,
    pub share_to_supply: f64,
    pub mandated_years: u32,
}

impl EffectiveParams {
    pub fn of(e: &EconomicParams) -> Self {
        let m = &e.multipliers;
        Self {
            rate_pipeline: e.effective_rate(Mode::Pipeline),
            rate_rail: e.effective_rate(Mode::Rail),
            rate_water: e.effective_rate(Mode::Water),
            rate_truck: e.effective_rate(Mode::Truck),
            capture_multiplier: m.capture,
            storage_multiplier: m.storage,
            capex_pipeline_per_mile: e.capex_pipeline_per_mile * m.pipeline,
            capex_rail_per_mile: e.capex_rail_per_mile * m.rail,
            capex_water_terminal_per_tonne: e.capex_water_terminal_per_tonne * m.water,
            share_to_supply: e.share_to_supply,
            mandated_years: e.mandated_years,
        }
    }

    const COLUMNS: [&'static str; 11] = [
        "rate_pipeline",
        "rate_rail",
        "rate_water",
        "rate_truck",
        "capture_multiplier",
        "storage_multiplier",
        "capex_pipeline_per_mile",
        "capex_rail_per_mile",
        "capex_water_terminal_per_tonne",
        "share_to_supply",
        "mandated_years",
    ];

    fn values(&self) -> Vec<String> {
        let mut v: Vec<String> = [
            self.rate_pipeline,
            self.rate_rail,
            self.rate_water,
            self.rate_truck,
            self.capture_multiplier,
            self.storage_multiplier,
            self.capex_pipeline_per_mile,
            self.capex_rail_per_mile,
            self.capex_water_terminal_per_tonne,
            self.share_to_supply,
        ]
        .map(format_num)
        .into();
        v.push(self.mandated_years.to_string());
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: SummaryStats,
    pub effective: EffectiveParams,
    /// Per-replication totals in replication order.
    pub totals: Vec<Totals>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: String,
    pub points: Vec<SweepPoint>,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::output(path, e.into())
}

/// Writes `sweep.csv` (axis, value, flattened statistics) and
/// `sweep_params.csv` (axis, value, effective parameters) into `dir`.
pub fn write_sweeps(dir: &Path, sweeps: &[SweepResult]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::output(dir, e))?;
    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    let mut header = vec!["axis".to_string(), "value".to_string()];
    header.extend(SummaryStats::columns());
    w.write_record(&header).map_err(csv_err(&path))?;
    for s in sweeps {
        for p in &s.points {
            let mut row = vec![s.axis.clone(), format_num(p.value)];
            row.extend(p.summary.values().into_iter().map(format_num));
            w.write_record(&row).map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(|e| Error::output(&path, e))?;

    let path = dir.join("sweep_params.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    let mut header = vec!["axis", "value"];
    header.extend(EffectiveParams::COLUMNS);
    w.write_record(&header).map_err(csv_err(&path))?;
    for s in sweeps {
        for p in &s.points {
            let mut row = vec![s.axis.clone(), format_num(p.value)];
            row.extend(p.effective.values());
            w.write_record(&row).map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(|e| Error::output(&path, e))
}

#[derive(Serialize)]
struct BatchSummary<'a> {
    replications: usize,
    base_seed: u64,
    algorithm: &'a str,
    seeds: Vec<u64>,
    stats: SummaryStats,
}

/// Writes a batch. A single replication goes straight into `dir`; larger
/// batches get `rep_000`, `rep_001`, ... subdirectories plus
/// `batch_summary.json` and `replications.csv`.
pub fn write_batch(dir: &Path, batch: &Batch, cfg: &ScenarioConfig, base_seed: u64) -> Result<()> {
    if let [only] = batch.results.as_slice() {
        return write_outputs(only, dir);
    }
    let width = (batch.results.len() - 1).to_string().len().max(3);
    for (i, r) in batch.results.iter().enumerate() {
        write_outputs(r, &dir.join(format!("rep_{i:0width$}")))?;
    }
    let summary = BatchSummary {
        replications: batch.results.len(),
        base_seed,
        algorithm: cfg.algorithm.as_str(),
        seeds: batch.results.iter().map(|r| r.seed).collect(),
        stats: batch.summary,
    };
    let path = dir.join("batch_summary.json");
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| Error::output(&path, e.into()))?;
    json.push('\n');
    fs::write(&path, json).map_err(|e| Error::output(&path, e))?;

    let path = dir.join("replications.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record([
        "replication",
        "seed",
        "total_tonnes",
        "tonnes_pipeline",
        "tonnes_rail",
        "tonnes_water",
        "total_distance_mean",
        "ac_distance_mean",
        "profit_per_tonne",
        "n_connections",
    ])
    .map_err(csv_err(&path))?;
    for (i, r) in batch.results.iter().enumerate() {
        let t = &r.totals;
        let mut row = vec![i.to_string(), r.seed.to_string()];
        row.extend(
            [
                t.total_tonnes,
                t.tonnes_by_mode.pipeline,
                t.tonnes_by_mode.rail,
                t.tonnes_by_mode.water,
                t.total_distance.mean,
                t.ac_distance.mean,
                t.profit_per_tonne,
            ]
            .map(format_num),
        );
        row.push(t.n_connections.to_string());
        w.write_record(&row).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|e| Error::output(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(default_cost_grid(), vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0]);
        assert_eq!(default_duration_grid(), vec![12, 13, 14, 15, 16, 17, 18]);
        assert_eq!(default_share_grid().len(), 10);
        assert_eq!(default_share_grid()[9], 0.95);
    }

    #[test]
    fn all_transport_scales_every_mode() {
        let mut e = EconomicParams::default();
        CostTarget::AllTransport.apply(&mut e, 2.0);
        let p = EffectiveParams::of(&e);
        assert_eq!(p.rate_pipeline, 2.0 * 0.0161);
        assert_eq!(p.rate_rail, 2.0 * 0.0708);
        assert_eq!(p.rate_water, 2.0 * 0.0644);
        assert_eq!(p.capture_multiplier, 1.0);
    }

    #[test]
    fn target_names_parse() {
        for t in CostTarget::ALL {
            assert_eq!(t.as_str().parse::<CostTarget>().unwrap(), t);
        }
        assert!("fuel".parse::<CostTarget>().is_err());
    }

    #[test]
    fn column_count_matches_values() {
        assert_eq!(SummaryStats::columns().len(), SummaryStats::default().values().len());
    }

    #[test]
    fn single_replication_stats_have_zero_spread() {
        let t = Totals {
            total_tonnes: 7.0,
            ..Default::default()
        };
        let s = SummaryStats::from_totals([&t]);
        assert_eq!(s.total_tonnes, Stat { mean: 7.0, median: 7.0, std: 0.0 });
    }
}
