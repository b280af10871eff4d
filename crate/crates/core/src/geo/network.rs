use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use super::great_circle_miles;
use crate::error::NetworkError;
use crate::model::{GeoPoint, Mode};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: Arc<str>,
    pub location: GeoPoint,
    pub available_year: i32,
}

/// Undirected link as supplied by the caller. `miles = None` means the
/// great-circle distance between the endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub miles: Option<f64>,
    pub available_year: i32,
}

#[derive(Debug, Clone, Copy)]
struct Link {
    to: usize,
    miles: f64,
    /// Year from which the link and both endpoints exist.
    year: i32,
}

/// Single-source shortest path lengths at one availability epoch.
#[derive(Debug)]
pub(crate) struct PathTree {
    pub miles: Vec<f64>,
    /// Latest availability year among the links on each chosen path.
    pub max_year: Vec<i32>,
}

/// The transport graph of one line-haul mode. Immutable once built.
#[derive(Debug, Clone)]
pub struct ModeNetwork {
    mode: Mode,
    nodes: Vec<Node>,
    index: HashMap<Arc<str>, usize>,
    adjacency: Vec<Vec<Link>>,
    edge_count: usize,
    epochs: Vec<i32>,
}

#[derive(PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl ModeNetwork {
    pub fn new(mode: Mode, nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, NetworkError> {
        if !mode.is_line_haul() {
            return Err(NetworkError::TruckNetwork);
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateNode {
                    mode,
                    id: n.id.to_string(),
                });
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let lookup = |id: &str| {
            index.get(id).copied().ok_or_else(|| NetworkError::UnknownNode {
                mode,
                id: id.to_string(),
            })
        };
        for e in &edges {
            let (a, b) = (lookup(&e.from)?, lookup(&e.to)?);
            let miles = match e.miles {
                Some(m) if m > 0.0 && m.is_finite() => m,
                Some(m) => {
                    return Err(NetworkError::EdgeLength {
                        mode,
                        from: e.from.clone(),
                        to: e.to.clone(),
                        miles: m,
                    })
                }
                None => great_circle_miles(nodes[a].location, nodes[b].location),
            };
            let year = e
                .available_year
                .max(nodes[a].available_year)
                .max(nodes[b].available_year);
            adjacency[a].push(Link { to: b, miles, year });
            adjacency[b].push(Link { to: a, miles, year });
        }
        let mut epochs: Vec<i32> = nodes
            .iter()
            .map(|n| n.available_year)
            .chain(adjacency.iter().flatten().map(|l| l.year))
            .collect();
        epochs.sort_unstable();
        epochs.dedup();
        Ok(Self {
            mode,
            nodes,
            index,
            adjacency,
            edge_count: edges.len(),
            epochs,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub(crate) fn node_at(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub(crate) fn node_index(&self, id: &str) -> Result<usize, NetworkError> {
        self.index.get(id).copied().ok_or_else(|| NetworkError::UnknownNode {
            mode: self.mode,
            id: id.to_string(),
        })
    }

    /// Distinct years at which some node or link comes online, ascending.
    pub fn epochs(&self) -> &[i32] {
        &self.epochs
    }

    /// The latest epoch not after `year`: the network state in force that year.
    pub fn epoch_at(&self, year: i32) -> Option<i32> {
        match self.epochs.partition_point(|&e| e <= year) {
            0 => None,
            k => Some(self.epochs[k - 1]),
        }
    }

    /// Nearest node available by `year`, as an index. Ties go to the
    /// lexicographically smallest node id.
    pub(crate) fn nearest_index(&self, p: GeoPoint, year: i32) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.available_year > year {
                continue;
            }
            let d = great_circle_miles(p, n.location);
            let better = match best {
                None => true,
                Some((j, bd)) => d < bd || (d == bd && n.id < self.nodes[j].id),
            };
            if better {
                best = Some((i, d));
            }
        }
        best
    }

    /// Nearest node available by `year` and its great-circle distance from `p`.
    pub fn nearest_node(&self, p: GeoPoint, year: i32) -> Option<(&str, f64)> {
        self.nearest_index(p, year)
            .map(|(i, d)| (&*self.nodes[i].id, d))
    }

    /// Dijkstra from `source` over links usable in `year`.
    pub(crate) fn path_tree(&self, source: usize, year: i32) -> PathTree {
        let n = self.nodes.len();
        let mut miles = vec![f64::INFINITY; n];
        let mut max_year = vec![i32::MIN; n];
        if self.nodes[source].available_year > year {
            return PathTree { miles, max_year };
        }
        miles[source] = 0.0;
        max_year[source] = self.nodes[source].available_year;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((Dist(0.0), source)));
        while let Some(Reverse((Dist(d), u))) = heap.pop() {
            if d > miles[u] {
                continue;
            }
            for link in &self.adjacency[u] {
                if link.year > year {
                    continue;
                }
                let nd = d + link.miles;
                if nd < miles[link.to] {
                    miles[link.to] = nd;
                    max_year[link.to] = max_year[u].max(link.year);
                    heap.push(Reverse((Dist(nd), link.to)));
                }
            }
        }
        PathTree { miles, max_year }
    }

    /// Shortest path length between two nodes using links available in
    /// `year`. `Ok(None)` means unreachable.
    pub fn shortest_path_miles(&self, from: &str, to: &str, year: i32) -> Result<Option<f64>, NetworkError> {
        let (a, b) = (self.node_index(from)?, self.node_index(to)?);
        if self.nodes[b].available_year > year {
            return Ok(None);
        }
        let d = self.path_tree(a, year).miles[b];
        Ok(d.is_finite().then_some(d))
    }
}

/// The line-haul networks of a scenario; any mode may be absent.
#[derive(Debug, Clone, Default)]
pub struct Networks {
    by_mode: [Option<ModeNetwork>; 3],
}

impl Networks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, net: ModeNetwork) {
        let i = net.mode().index();
        self.by_mode[i] = Some(net);
    }

    pub fn with(mut self, net: ModeNetwork) -> Self {
        self.insert(net);
        self
    }

    pub fn get(&self, mode: Mode) -> Option<&ModeNetwork> {
        if !mode.is_line_haul() {
            return None;
        }
        self.by_mode[mode.index()].as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModeNetwork> {
        self.by_mode.iter().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.iter().next().is_none()
    }
}
