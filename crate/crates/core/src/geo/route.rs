use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::network::PathTree;
use super::{great_circle_miles, ModeNetwork, Networks};
use crate::model::{DemandAgent, GeoPoint, Mode, SupplyAgent};

/// Inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearWindow {
    pub from: i32,
    pub to: i32,
}

impl YearWindow {
    pub fn new(from: i32, to: i32) -> Self {
        Self { from, to }
    }

    pub fn is_empty(&self) -> bool {
        self.from > self.to
    }
}

/// A three-leg path from a source to a sink: access leg A, line-haul leg B
/// and egress leg C. Water routes ride trucks on A and C.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub supply_id: Arc<str>,
    pub demand_id: Arc<str>,
    pub mode: Mode,
    pub entry_node: Arc<str>,
    pub exit_node: Arc<str>,
    pub leg_a_miles: f64,
    pub leg_b_miles: f64,
    pub leg_c_miles: f64,
    /// First year every element of the route, and the sink, exists.
    pub available_year: i32,
}

impl Route {
    pub fn total_miles(&self) -> f64 {
        self.leg_a_miles + self.leg_b_miles + self.leg_c_miles
    }

    /// Combined length of the privately built access legs.
    pub fn ac_miles(&self) -> f64 {
        self.leg_a_miles + self.leg_c_miles
    }

    /// Carrier on legs A and C.
    pub fn access_mode(&self) -> Mode {
        match self.mode {
            Mode::Water => Mode::Truck,
            m => m,
        }
    }
}

/// A route together with the earliest year a connection over it can start.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub route: Route,
    pub earliest_start: i32,
    /// Index of the sink in the slice the candidates were built from.
    pub sink: usize,
}

struct Access {
    node: usize,
    miles: f64,
}

fn assemble(
    supply_id: Arc<str>,
    demand_id: Arc<str>,
    d: &DemandAgent,
    net: &ModeNetwork,
    entry: &Access,
    exit: &Access,
    tree: Option<&PathTree>,
) -> Option<Route> {
    let (entry_node, exit_node) = (net.node_at(entry.node), net.node_at(exit.node));
    let mut available = entry_node
        .available_year
        .max(exit_node.available_year)
        .max(d.available_year);
    let leg_b = match net.mode() {
        Mode::Pipeline => great_circle_miles(entry_node.location, exit_node.location),
        _ => {
            let tree = tree?;
            let miles = tree.miles[exit.node];
            if !miles.is_finite() {
                return None;
            }
            available = available.max(tree.max_year[exit.node]);
            miles
        }
    };
    Some(Route {
        supply_id,
        demand_id,
        mode: net.mode(),
        entry_node: entry_node.id.clone(),
        exit_node: exit_node.id.clone(),
        leg_a_miles: entry.miles,
        leg_b_miles: leg_b,
        leg_c_miles: exit.miles,
        available_year: available,
    })
}

/// Builds the route from `s` to `d` over `net` as the network stands in `year`.
///
/// Rail and water use the network's shortest path between the nearest
/// entry and exit nodes; the pipeline middle leg is the straight
/// great-circle between those nodes. Returns `None` when the mode is not
/// permitted for both agents, no node is available yet, or the exit node
/// cannot be reached.
pub fn build_route(s: &SupplyAgent, d: &DemandAgent, mode: Mode, net: &ModeNetwork, year: i32) -> Option<Route> {
    if net.mode() != mode || !s.allowed_modes.intersection(d.allowed_modes).contains(mode) {
        return None;
    }
    let (en, em) = net.nearest_index(s.location, year)?;
    let (xn, xm) = net.nearest_index(d.location, year)?;
    let tree = (mode != Mode::Pipeline).then(|| net.path_tree(en, year));
    assemble(
        s.id.as_str().into(),
        d.id.as_str().into(),
        d,
        net,
        &Access { node: en, miles: em },
        &Access { node: xn, miles: xm },
        tree.as_ref(),
    )
}

/// Nearest available node per network epoch, for one location.
type AccessByEpoch = Vec<Option<(usize, f64)>>;

fn access_table(net: &ModeNetwork, p: GeoPoint) -> AccessByEpoch {
    net.epochs().iter().map(|&e| net.nearest_index(p, e)).collect()
}

/// Shared route-assembly context for one set of networks and sinks.
///
/// Nearest-node lookups are precomputed per network epoch, and shortest
/// path trees are computed on demand and cached by (mode, entry node,
/// epoch). The planner is `Sync`; cached values are pure functions of
/// their key, so concurrent use returns the same routes as serial use.
pub struct RoutePlanner<'a> {
    networks: &'a Networks,
    sinks: &'a [DemandAgent],
    sink_ids: Vec<Arc<str>>,
    /// `[mode][epoch][sink]`
    sink_access: [Vec<AccessByEpoch>; 3],
    sources: HashMap<String, (GeoPoint, [AccessByEpoch; 3])>,
    paths: Mutex<HashMap<(usize, usize, i32), Arc<PathTree>>>,
}

impl<'a> RoutePlanner<'a> {
    /// `sources` only seeds the access cache; any supply agent may be queried.
    pub fn new(networks: &'a Networks, sources: &[SupplyAgent], sinks: &'a [DemandAgent]) -> Self {
        let mut sink_access: [Vec<AccessByEpoch>; 3] = Default::default();
        for net in networks.iter() {
            let per_sink: Vec<AccessByEpoch> = sinks.iter().map(|d| access_table(net, d.location)).collect();
            // transpose to [epoch][sink]
            let epochs = net.epochs().len();
            sink_access[net.mode().index()] = (0..epochs)
                .map(|k| per_sink.iter().map(|row| row[k]).collect())
                .collect();
        }
        let sources = sources
            .iter()
            .map(|s| {
                let mut by_mode: [AccessByEpoch; 3] = Default::default();
                for net in networks.iter() {
                    by_mode[net.mode().index()] = access_table(net, s.location);
                }
                (s.id.clone(), (s.location, by_mode))
            })
            .collect();
        Self {
            networks,
            sinks,
            sink_ids: sinks.iter().map(|d| Arc::from(d.id.as_str())).collect(),
            sink_access,
            sources,
            paths: Mutex::new(HashMap::new()),
        }
    }

    pub fn sinks(&self) -> &'a [DemandAgent] {
        self.sinks
    }

    pub fn networks(&self) -> &'a Networks {
        self.networks
    }

    fn path_tree(&self, net: &ModeNetwork, entry: usize, epoch: i32) -> Arc<PathTree> {
        let key = (net.mode().index(), entry, epoch);
        if let Some(t) = self.paths.lock().expect("path cache poisoned").get(&key) {
            return t.clone();
        }
        // computed outside the lock; a racing insert stores an identical tree
        let tree = Arc::new(net.path_tree(entry, epoch));
        self.paths
            .lock()
            .expect("path cache poisoned")
            .entry(key)
            .or_insert(tree)
            .clone()
    }

    /// Every distinct route version from `s` to an open sink that can
    /// start within `window`, with its earliest feasible start year.
    ///
    /// Networks change only at their epochs; the route is rebuilt at the
    /// epoch in force at `window.from` and at each later epoch inside the
    /// window. A version whose entry node, exit node and middle leg repeat
    /// an earlier one is dropped.
    pub fn enumerate(&self, s: &SupplyAgent, window: YearWindow, sink_open: impl Fn(usize) -> bool) -> Vec<Candidate> {
        let mut out = Vec::new();
        if window.is_empty() || self.sinks.is_empty() {
            return out;
        }
        let supply_id: Arc<str> = s.id.as_str().into();
        let cached = self.sources.get(&s.id).filter(|(p, _)| *p == s.location);
        for net in self.networks.iter() {
            let mode = net.mode();
            if !s.allowed_modes.contains(mode) {
                continue;
            }
            let epochs = net.epochs();
            let first = net.epochs().partition_point(|&e| e <= window.from);
            let start_k = first.saturating_sub(1);
            let end_k = epochs.partition_point(|&e| e <= window.to);
            if start_k >= end_k {
                continue;
            }
            // per relevant epoch: (earliest start for this version, epoch index, entry, tree)
            let mut states = Vec::new();
            for k in start_k..end_k {
                let entry = match cached {
                    Some((_, by_mode)) => by_mode[mode.index()][k],
                    None => net.nearest_index(s.location, epochs[k]),
                };
                let Some((node, miles)) = entry else { continue };
                let tree = (mode != Mode::Pipeline).then(|| self.path_tree(net, node, epochs[k]));
                states.push((epochs[k].max(window.from), k, Access { node, miles }, tree));
            }
            let mut seen: Vec<(usize, usize, u64)> = Vec::new();
            for (j, d) in self.sinks.iter().enumerate() {
                if !d.allowed_modes.contains(mode) || !sink_open(j) {
                    continue;
                }
                seen.clear();
                for (version_start, k, entry, tree) in &states {
                    let Some((xn, xm)) = self.sink_access[mode.index()][*k][j] else { continue };
                    let exit = Access { node: xn, miles: xm };
                    let Some(route) = assemble(
                        supply_id.clone(),
                        self.sink_ids[j].clone(),
                        d,
                        net,
                        entry,
                        &exit,
                        tree.as_deref(),
                    ) else {
                        continue;
                    };
                    let key = (entry.node, xn, route.leg_b_miles.to_bits());
                    if seen.contains(&key) {
                        continue;
                    }
                    seen.push(key);
                    let earliest = route.available_year.max(*version_start);
                    if earliest <= window.to {
                        out.push(Candidate { route, earliest_start: earliest, sink: j });
                    }
                }
            }
        }
        out
    }
}

/// Candidate routes from `s` to any of `sinks` startable within `window`.
pub fn enumerate_candidates(s: &SupplyAgent, sinks: &[DemandAgent], nets: &Networks, window: YearWindow) -> Vec<Candidate> {
    RoutePlanner::new(nets, &[], sinks).enumerate(s, window, |_| true)
}
