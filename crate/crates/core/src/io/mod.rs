//! File formats: CSV inputs, result writers, the candidate-site generator
//! and the synthetic scenario generator.
//!
//! All files are UTF-8 CSV with a header row. `inf` marks an unlimited
//! capacity and mode lists are `|`-separated (`pipeline|rail`).

mod input;
mod output;
mod sites;
mod synthetic;

pub use input::{load_network, load_scenario, load_sinks, load_sinks_with, load_sources};
pub use output::{
    format_num, write_edges, write_nodes, write_outputs, write_sinks, write_sources, Summary, CONNECTIONS_HEADER,
};
pub use sites::{generate_candidate_sinks, write_candidates, PopulationCell, PopulationGrid, SinkCandidate, SiteParams};
pub use synthetic::{generate_synthetic_scenario, BBox, SyntheticParams, SyntheticScenario};
