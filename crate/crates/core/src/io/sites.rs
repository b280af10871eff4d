//! Candidate storage sites from greedy source clustering.
//!
//! Sources are grouped around the heaviest unclustered emitter, every
//! cluster is anchored at its nearest transport node, and anchors in
//! populated areas are screened out.

use std::collections::HashSet;
use std::path::Path;

use super::output::format_num;
use crate::error::{LoadError, Result};
use crate::geo::{great_circle_miles, Networks};
use crate::model::{GeoPoint, Mode, SupplyAgent};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationCell {
    pub location: GeoPoint,
    pub daytime_count: f64,
    pub nighttime_count: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PopulationGrid {
    pub cells: Vec<PopulationCell>,
}

impl PopulationGrid {
    /// Reads `lon,lat,daytime_count,nighttime_count`.
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let row_err = |line: u64, column: &str, message: String| LoadError::Row {
            path: path.to_path_buf(),
            line,
            column: column.to_string(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|source| LoadError::Csv {
                path: path.to_path_buf(),
                source,
            })?;
        let headers = reader.headers().map_err(|source| LoadError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let cols = ["lon", "lat", "daytime_count", "nighttime_count"];
        let mut idx = [0usize; 4];
        for (k, c) in cols.iter().enumerate() {
            idx[k] = headers.iter().position(|h| h == *c).ok_or_else(|| LoadError::MissingColumn {
                path: path.to_path_buf(),
                column: c.to_string(),
            })?;
        }
        let mut cells = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|source| LoadError::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let mut v = [0.0f64; 4];
            for k in 0..4 {
                let text = record.get(idx[k]).unwrap_or("");
                v[k] = text
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite())
                    .ok_or_else(|| row_err(line, cols[k], format!("cannot parse `{text}`")))?;
            }
            let location = GeoPoint::new(v[0], v[1]).map_err(|e| row_err(line, "lon", e.to_string()))?;
            for k in 2..4 {
                if v[k] < 0.0 {
                    return Err(row_err(line, cols[k], "count must be nonnegative".into()));
                }
            }
            cells.push(PopulationCell {
                location,
                daytime_count: v[2],
                nighttime_count: v[3],
            });
        }
        Ok(Self { cells })
    }

    /// Largest day or night count among cells within `radius` miles of `p`.
    pub fn max_within(&self, p: GeoPoint, radius: f64) -> f64 {
        self.cells
            .iter()
            .filter(|c| great_circle_miles(p, c.location) <= radius)
            .map(|c| c.daytime_count.max(c.nighttime_count))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteParams {
    pub cluster_radius_miles: f64,
    pub pop_radius_miles: f64,
    pub pop_threshold: f64,
    pub max_sites: usize,
}

impl Default for SiteParams {
    fn default() -> Self {
        Self {
            cluster_radius_miles: 100.0,
            pop_radius_miles: 25.0,
            pop_threshold: 1000.0,
            max_sites: 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkCandidate {
    pub location: GeoPoint,
    pub node_mode: Mode,
    pub node_id: String,
    /// Zero: the candidate sits on the node itself.
    pub nearest_network_miles: f64,
    /// Distance from the cluster centroid to the candidate.
    pub nearest_cluster_miles: f64,
    pub max_population_within_radius: f64,
    pub cluster_tonnes: f64,
}

/// Greedy clustering of `sources` into candidate sink sites. Deterministic:
/// ties in tonnage break by source id and ties in node distance by
/// (mode, node id).
pub fn generate_candidate_sinks(
    sources: &[SupplyAgent],
    networks: &Networks,
    pop: &PopulationGrid,
    params: &SiteParams,
) -> Vec<SinkCandidate> {
    let mut order: Vec<&SupplyAgent> = sources.iter().collect();
    order.sort_by(|a, b| b.annual_tonnes.total_cmp(&a.annual_tonnes).then_with(|| a.id.cmp(&b.id)));
    let mut clustered = vec![false; order.len()];
    let mut seen_nodes = HashSet::new();
    let mut out = Vec::new();
    for i in 0..order.len() {
        if clustered[i] {
            continue;
        }
        let centroid = order[i].location;
        let mut tonnes = 0.0;
        for j in i..order.len() {
            if !clustered[j] && great_circle_miles(centroid, order[j].location) <= params.cluster_radius_miles {
                clustered[j] = true;
                tonnes += order[j].annual_tonnes;
            }
        }
        let nearest = networks
            .iter()
            .flat_map(|net| net.nodes().iter().map(move |n| (net.mode(), n)))
            .map(|(mode, n)| (great_circle_miles(centroid, n.location), mode, n))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then_with(|| a.2.id.cmp(&b.2.id)));
        let Some((miles, mode, node)) = nearest else { continue };
        if !seen_nodes.insert((mode, node.id.clone())) {
            continue;
        }
        let population = pop.max_within(node.location, params.pop_radius_miles);
        if population > params.pop_threshold {
            continue;
        }
        out.push(SinkCandidate {
            location: node.location,
            node_mode: mode,
            node_id: node.id.to_string(),
            nearest_network_miles: 0.0,
            nearest_cluster_miles: miles,
            max_population_within_radius: population,
            cluster_tonnes: tonnes,
        });
    }
    out.sort_by(|a, b| {
        a.max_population_within_radius
            .total_cmp(&b.max_population_within_radius)
            .then(b.cluster_tonnes.total_cmp(&a.cluster_tonnes))
            .then(a.node_mode.cmp(&b.node_mode))
            .then_with(|| a.node_id.cmp(&b.node_id))
    });
    out.truncate(params.max_sites);
    out
}

/// Writes candidates in the sink CSV layout as storage sites, with the
/// screening metrics appended.
pub fn write_candidates(path: &Path, sites: &[SinkCandidate], available_year: i32) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| crate::error::Error::output(path, e.into()))?;
    let io = |e: csv::Error| crate::error::Error::output(path, e.into());
    w.write_record([
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
        "node_mode",
        "node_id",
        "nearest_network_miles",
        "nearest_cluster_miles",
        "max_population",
        "cluster_tonnes",
    ])
    .map_err(io)?;
    for (k, s) in sites.iter().enumerate() {
        w.write_record([
            format!("C{:03}", k + 1),
            "storage".into(),
            "geologic".into(),
            format_num(s.location.lon()),
            format_num(s.location.lat()),
            String::new(),
            "inf".into(),
            "inf".into(),
            available_year.to_string(),
            String::new(),
            String::new(),
            s.node_mode.to_string(),
            s.node_id.clone(),
            format_num(s.nearest_network_miles),
            format_num(s.nearest_cluster_miles),
            format_num(s.max_population_within_radius),
            format_num(s.cluster_tonnes),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| crate::error::Error::output(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{ModeNetwork, Node};
    use crate::model::SourceType;
    use std::sync::Arc;

    fn src(id: &str, lon: f64, lat: f64, t: f64) -> SupplyAgent {
        SupplyAgent::new(id, SourceType::Cement, GeoPoint::new(lon, lat).unwrap(), t)
    }

    fn one_node_net(lon: f64, lat: f64) -> Networks {
        let node = Node {
            id: Arc::from("N1"),
            location: GeoPoint::new(lon, lat).unwrap(),
            available_year: 2025,
        };
        Networks::new().with(ModeNetwork::new(Mode::Rail, vec![node], vec![]).unwrap())
    }

    #[test]
    fn no_sources_no_sites() {
        let sites = generate_candidate_sinks(&[], &one_node_net(0.0, 0.0), &PopulationGrid::default(), &SiteParams::default());
        assert!(sites.is_empty());
    }

    #[test]
    fn close_sources_form_one_site() {
        // 0.145 degrees of latitude is about 10 miles
        let s = [src("a", -90.0, 30.0, 3.0), src("b", -90.0, 30.145, 2.0), src("c", -90.0, 30.29, 1.0)];
        let sites = generate_candidate_sinks(&s, &one_node_net(-89.5, 30.1), &PopulationGrid::default(), &SiteParams::default());
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].node_id, "N1");
        assert_eq!(sites[0].cluster_tonnes, 6.0);
        assert_eq!(sites[0].nearest_network_miles, 0.0);
    }

    #[test]
    fn populated_sites_are_screened() {
        let s = [src("a", -90.0, 30.0, 3.0)];
        let pop = PopulationGrid {
            cells: vec![PopulationCell {
                location: GeoPoint::new(-90.0, 30.05).unwrap(),
                daytime_count: 10.0,
                nighttime_count: 5000.0,
            }],
        };
        let sites = generate_candidate_sinks(&s, &one_node_net(-90.0, 30.0), &pop, &SiteParams::default());
        assert!(sites.is_empty());
    }

    #[test]
    fn far_clusters_are_ranked_and_truncated() {
        let nodes: Vec<Node> = (0..5)
            .map(|k| Node {
                id: Arc::from(format!("N{k}")),
                location: GeoPoint::new(-120.0 + 10.0 * f64::from(k), 35.0).unwrap(),
                available_year: 2025,
            })
            .collect();
        let net = Networks::new().with(ModeNetwork::new(Mode::Water, nodes, vec![]).unwrap());
        let s: Vec<_> = (0..5).map(|k| src(&format!("s{k}"), -120.0 + 10.0 * f64::from(k), 35.0, f64::from(k + 1))).collect();
        let params = SiteParams {
            max_sites: 3,
            ..SiteParams::default()
        };
        let sites = generate_candidate_sinks(&s, &net, &PopulationGrid::default(), &params);
        let ids: Vec<&str> = sites.iter().map(|c| c.node_id.as_str()).collect();
        assert_eq!(ids, ["N4", "N3", "N2"]);
    }
}
