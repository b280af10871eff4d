//! Annual-tick simulation of the supply agent lifecycle.
//!
//! Each year: agents whose start year has come move from waiting to
//! selecting; every selecting agent, in ascending id order, enumerates its
//! candidate routes and applies the configured matching rule; connections
//! whose mandated duration has elapsed complete; and the tonnage of all
//! active connections is tallied by line-haul mode.
//!
//! A replication owns its agents. Random draws come from substreams keyed
//! by `(seed, agent id, purpose)`, so changing the matching rule or agent
//! order never changes an agent's costs, capture fraction or start year.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::econ::ConnectionEvaluation;
use crate::error::{Error, Result};
use crate::geo::{Networks, Route, RoutePlanner, YearWindow};
use crate::matching::{evaluate_candidates, select, MatchDecision};
use crate::model::{AgentState, Capacity, DemandAgent, Mode, ScenarioConfig, SupplyAgent};
use crate::rng::{substream, Purpose};
use crate::stats::{describe, Stat};

/// Loaded inputs of a scenario: agents and networks.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Sorted by id.
    pub sources: Vec<SupplyAgent>,
    pub sinks: Vec<DemandAgent>,
    pub networks: Networks,
}

impl Scenario {
    pub fn new(config: ScenarioConfig, mut sources: Vec<SupplyAgent>, sinks: Vec<DemandAgent>, networks: Networks) -> Result<Self> {
        let violations = config.validate();
        if !violations.is_empty() {
            let msg: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::Invalid(msg.join("; ")));
        }
        sources.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = sources.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Invalid(format!("duplicate supply id `{}`", w[0].id)));
        }
        for s in &sources {
            if let Some(y) = s.start_year {
                if y < config.first_year || y > config.last_admission_year {
                    return Err(Error::Invalid(format!(
                        "supply {} start year {y} outside [{}, {}]",
                        s.id, config.first_year, config.last_admission_year
                    )));
                }
            }
            if !(s.annual_tonnes > 0.0) {
                return Err(Error::Invalid(format!("supply {} has non-positive tonnage", s.id)));
            }
        }
        Ok(Self {
            config,
            sources,
            sinks,
            networks,
        })
    }
}

/// Gives every agent without a fixed start year an independent uniform
/// draw on `[window.from, window.to]` from its own substream.
pub fn assign_start_years(agents: &mut [SupplyAgent], window: YearWindow, seed: u64) {
    for a in agents.iter_mut().filter(|a| a.start_year.is_none()) {
        let mut rng = substream(seed, &a.id, Purpose::StartYear);
        a.start_year = Some(rng.random_range(window.from..=window.to));
    }
}

/// Draws capture cost and capture fraction for every agent.
pub fn draw_agent_parameters(agents: &mut [SupplyAgent], cfg: &ScenarioConfig, seed: u64) {
    let (lo, hi) = cfg.capture_fraction_range;
    for a in agents.iter_mut() {
        a.capture_cost = crate::econ::draw_capture_cost(a.source_type, &mut substream(seed, &a.id, Purpose::CaptureCost));
        a.capture_fraction = if lo == hi {
            lo
        } else {
            let u: f64 = substream(seed, &a.id, Purpose::CaptureFraction).random();
            (lo + u * (hi - lo)).min(hi)
        };
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub supply_id: Arc<str>,
    pub demand_id: Arc<str>,
    pub route: Route,
    pub start_year: i32,
    /// Last active year, inclusive.
    pub end_year: i32,
    pub annual_tonnes_moved: f64,
    pub evaluation: ConnectionEvaluation,
}

impl Connection {
    pub fn is_active(&self, year: i32) -> bool {
        (self.start_year..=self.end_year).contains(&year)
    }

    pub fn lifetime_tonnes(&self) -> f64 {
        self.evaluation.lifetime_tonnes()
    }

    /// Tonnes captured in the years up to and including `last_year`.
    pub fn tonnes_through(&self, last_year: i32) -> f64 {
        let years = (self.end_year.min(last_year) - self.start_year + 1).max(0);
        self.annual_tonnes_moved * f64::from(years)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Released { supply_id: String },
    Connected { supply_id: String, demand_id: String, mode: Mode },
    Deferred { supply_id: String, until: i32 },
    Completed { supply_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub supply_id: String,
    pub year: i32,
    pub to: AgentState,
}

/// Values indexed by line-haul mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerMode {
    pub pipeline: f64,
    pub rail: f64,
    pub water: f64,
}

impl PerMode {
    pub fn get(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Pipeline => self.pipeline,
            Mode::Rail => self.rail,
            Mode::Water => self.water,
            Mode::Truck => 0.0,
        }
    }

    pub fn get_mut(&mut self, mode: Mode) -> &mut f64 {
        match mode {
            Mode::Pipeline => &mut self.pipeline,
            Mode::Rail => &mut self.rail,
            Mode::Water => &mut self.water,
            Mode::Truck => panic!("truck is never a line-haul mode"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub total_tonnes: f64,
    pub tonnes_by_mode: PerMode,
    pub mode_shares: PerMode,
    pub total_distance: Stat,
    pub ac_distance: Stat,
    /// Aggregate supply plus demand profit over aggregate tonnes.
    pub profit_per_tonne: f64,
    pub n_connections: usize,
}

impl Totals {
    /// Tonnage counts capture up to and including `horizon_end`; a
    /// connection running past the horizon contributes only its in-horizon
    /// years. Profit per tonne uses whole-connection profit and tonnage.
    ///
    /// Sums run over connections in supply-id order so that the same set
    /// of connections always yields bit-identical totals.
    pub fn from_connections(connections: &[Connection], horizon_end: i32) -> Self {
        let mut sorted: Vec<&Connection> = connections.iter().collect();
        sorted.sort_by(|a, b| a.supply_id.cmp(&b.supply_id));
        let mut t = Totals {
            n_connections: sorted.len(),
            ..Default::default()
        };
        let (mut profit, mut lifetime) = (0.0, 0.0);
        for c in &sorted {
            let tonnes = c.tonnes_through(horizon_end);
            t.total_tonnes += tonnes;
            *t.tonnes_by_mode.get_mut(c.route.mode) += tonnes;
            profit += c.evaluation.total_profit();
            lifetime += c.lifetime_tonnes();
        }
        if t.total_tonnes > 0.0 {
            for m in Mode::LINE_HAUL {
                *t.mode_shares.get_mut(m) = t.tonnes_by_mode.get(m) / t.total_tonnes;
            }
            t.profit_per_tonne = profit / lifetime;
        }
        let totals: Vec<f64> = sorted.iter().map(|c| c.route.total_miles()).collect();
        let acs: Vec<f64> = sorted.iter().map(|c| c.route.ac_miles()).collect();
        t.total_distance = describe(&totals);
        t.ac_distance = describe(&acs);
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub seed: u64,
    pub connections: Vec<Connection>,
    /// Tonnes captured per (year, line-haul mode); only nonzero entries.
    pub annual_capture: BTreeMap<(i32, Mode), f64>,
    pub totals: Totals,
    pub transitions: Vec<Transition>,
    /// Agents as drawn for this replication, in id order.
    pub agents: Vec<SupplyAgent>,
}

impl ReplicationResult {
    /// Total capture per year across modes, for every simulated year.
    pub fn annual_totals(&self, years: std::ops::RangeInclusive<i32>) -> Vec<(i32, f64)> {
        years
            .map(|y| {
                let total = Mode::LINE_HAUL
                    .iter()
                    .map(|&m| self.annual_capture.get(&(y, m)).copied().unwrap_or(0.0))
                    .sum();
                (y, total)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct SinkState {
    annual: Capacity,
    total: Capacity,
}

/// Mutable state of one replication in progress.
pub struct Replication<'e> {
    planner: &'e RoutePlanner<'e>,
    cfg: &'e ScenarioConfig,
    seed: u64,
    agents: Vec<SupplyAgent>,
    sinks: Vec<SinkState>,
    capacity_bound: bool,
    /// No profitable candidate can ever appear for these agents.
    exhausted: Vec<bool>,
    connection_of: Vec<Option<usize>>,
    connections: Vec<Connection>,
    annual_capture: BTreeMap<(i32, Mode), f64>,
    transitions: Vec<Transition>,
}

impl<'e> Replication<'e> {
    pub fn new(planner: &'e RoutePlanner<'e>, cfg: &'e ScenarioConfig, sources: &[SupplyAgent], seed: u64) -> Self {
        let mut agents = sources.to_vec();
        agents.sort_by(|a, b| a.id.cmp(&b.id));
        assign_start_years(&mut agents, YearWindow::new(cfg.first_year, cfg.last_admission_year), seed);
        draw_agent_parameters(&mut agents, cfg, seed);
        let sinks: Vec<SinkState> = planner
            .sinks()
            .iter()
            .map(|d| SinkState {
                annual: d.annual_capacity,
                total: d.total_capacity,
            })
            .collect();
        let capacity_bound = sinks
            .iter()
            .any(|s| s.annual != Capacity::Unlimited || s.total != Capacity::Unlimited);
        let n = agents.len();
        Self {
            planner,
            cfg,
            seed,
            agents,
            sinks,
            capacity_bound,
            exhausted: vec![false; n],
            connection_of: vec![None; n],
            connections: Vec::new(),
            annual_capture: BTreeMap::new(),
            transitions: Vec::new(),
        }
    }

    pub fn agents(&self) -> &[SupplyAgent] {
        &self.agents
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    fn transition(&mut self, i: usize, year: i32, to: AgentState) -> Result<()> {
        self.agents[i].advance(to)?;
        self.transitions.push(Transition {
            supply_id: self.agents[i].id.clone(),
            year,
            to,
        });
        Ok(())
    }

    fn decide(&self, i: usize, year: i32) -> Result<MatchDecision> {
        let cfg = self.cfg;
        let agent = &self.agents[i];
        let q = agent.captured_tonnes();
        let years = cfg.econ.mandated_years as i32;
        let window = YearWindow::new(year, cfg.last_admission_year);
        let sinks = self.planner.sinks();
        let open = |j: usize| {
            let st = &self.sinks[j];
            st.annual.admits(q) && st.total.admits(q * f64::from(cfg.econ.mandated_years))
        };
        let mut candidates = self.planner.enumerate(agent, window, open);
        candidates.retain(|c| match sinks[c.sink].end_year {
            Some(end) => c.earliest_start + years - 1 <= end,
            None => true,
        });
        let evaluated = evaluate_candidates(agent, sinks, &candidates, &cfg.econ)?;
        Ok(select(&evaluated, year, cfg.algorithm))
    }

    /// Advances the simulation through `year`.
    pub fn step_year(&mut self, year: i32) -> Result<Vec<Event>> {
        let mut events = Vec::new();
        for i in 0..self.agents.len() {
            if self.agents[i].state == AgentState::Waiting && self.agents[i].start_year == Some(year) {
                self.transition(i, year, AgentState::Selecting)?;
                events.push(Event::Released {
                    supply_id: self.agents[i].id.clone(),
                });
            }
        }

        if year <= self.cfg.last_admission_year {
            for i in 0..self.agents.len() {
                if self.agents[i].state != AgentState::Selecting || self.exhausted[i] {
                    continue;
                }
                match self.decide(i, year)? {
                    MatchDecision::Connect(eval) => {
                        events.push(Event::Connected {
                            supply_id: self.agents[i].id.clone(),
                            demand_id: eval.route.demand_id.to_string(),
                            mode: eval.route.mode,
                        });
                        self.connect(i, year, eval)?;
                    }
                    MatchDecision::Defer { until, .. } => events.push(Event::Deferred {
                        supply_id: self.agents[i].id.clone(),
                        until,
                    }),
                    MatchDecision::Wait { .. } => {}
                    MatchDecision::NoMatch => {
                        // the window only shrinks, so without capacity limits this is final
                        self.exhausted[i] = !self.capacity_bound;
                    }
                }
            }
        }

        for i in 0..self.agents.len() {
            let Some(c) = self.connection_of[i] else { continue };
            if self.agents[i].state == AgentState::Connected && self.connections[c].end_year < year {
                self.transition(i, year, AgentState::Complete)?;
                let sink = self.sink_index(c);
                self.sinks[sink].annual.release(self.connections[c].annual_tonnes_moved);
                events.push(Event::Completed {
                    supply_id: self.agents[i].id.clone(),
                });
            }
        }

        let mut active: Vec<&Connection> = self.connections.iter().filter(|c| c.is_active(year)).collect();
        active.sort_by(|a, b| a.supply_id.cmp(&b.supply_id));
        for c in active {
            *self.annual_capture.entry((year, c.route.mode)).or_insert(0.0) += c.annual_tonnes_moved;
        }
        Ok(events)
    }

    fn sink_index(&self, c: usize) -> usize {
        let id = &self.connections[c].demand_id;
        self.planner
            .sinks()
            .iter()
            .position(|d| *d.id == **id)
            .expect("connection sink exists")
    }

    fn connect(&mut self, i: usize, year: i32, eval: ConnectionEvaluation) -> Result<()> {
        let years = self.cfg.econ.mandated_years as i32;
        let q = eval.annual_tonnes_moved;
        let conn = Connection {
            supply_id: eval.route.supply_id.clone(),
            demand_id: eval.route.demand_id.clone(),
            route: eval.route.clone(),
            start_year: year,
            end_year: year + years - 1,
            annual_tonnes_moved: q,
            evaluation: eval,
        };
        self.connections.push(conn);
        let c = self.connections.len() - 1;
        self.connection_of[i] = Some(c);
        let sink = self.sink_index(c);
        self.sinks[sink].annual.consume(q);
        self.sinks[sink].total.consume(q * f64::from(self.cfg.econ.mandated_years));
        self.transition(i, year, AgentState::Connected)
    }

    pub fn finish(self) -> ReplicationResult {
        ReplicationResult {
            seed: self.seed,
            totals: Totals::from_connections(&self.connections, self.cfg.horizon_end),
            connections: self.connections,
            annual_capture: self.annual_capture,
            transitions: self.transitions,
            agents: self.agents,
        }
    }
}

/// Runs replications against one loaded scenario, sharing route caches.
pub struct Engine<'a> {
    scenario: &'a Scenario,
    planner: RoutePlanner<'a>,
}

impl<'a> Engine<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self {
            planner: RoutePlanner::new(&scenario.networks, &scenario.sources, &scenario.sinks),
            scenario,
        }
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    /// Starts a replication under `cfg`, which may override the
    /// scenario's algorithm and economic parameters. Input paths in `cfg`
    /// are ignored.
    pub fn replication<'e>(&'e self, cfg: &'e ScenarioConfig, seed: u64) -> Replication<'e>
    where
        'a: 'e,
    {
        Replication::new(&self.planner, cfg, &self.scenario.sources, seed)
    }

    pub fn run(&self, cfg: &ScenarioConfig, seed: u64) -> Result<ReplicationResult> {
        let violations = cfg.validate();
        if let Some(v) = violations.first() {
            return Err(Error::Invalid(v.to_string()));
        }
        let mut rep = self.replication(cfg, seed);
        for year in cfg.first_year..=cfg.horizon_end {
            rep.step_year(year)?;
        }
        Ok(rep.finish())
    }
}

/// Loads the scenario named by `cfg` and runs one replication with `cfg.seed`.
pub fn run_replication(cfg: &ScenarioConfig) -> Result<ReplicationResult> {
    let scenario = crate::io::load_scenario(cfg)?;
    Engine::new(&scenario).run(cfg, cfg.seed)
}
