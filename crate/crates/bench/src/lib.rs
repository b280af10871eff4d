//! Fixtures shared by the benchmarks.

use ccus_core::io::{generate_synthetic_scenario, SyntheticParams};
use ccus_core::{Scenario, ScenarioConfig};

/// A synthetic CONUS scenario with `n_sources` emitters and `n_sinks` sinks.
pub fn synthetic(n_sources: usize, n_sinks: usize, seed: u64) -> Scenario {
    let params = SyntheticParams {
        n_sources,
        n_sinks,
        seed,
        ..Default::default()
    };
    generate_synthetic_scenario(&params)
        .and_then(|g| g.to_scenario(&ScenarioConfig::default()))
        .expect("synthetic scenario")
}
