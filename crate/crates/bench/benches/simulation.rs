use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ccus_bench::synthetic;
use ccus_core::geo::RoutePlanner;
use ccus_core::{great_circle_miles, Algorithm, Engine, GeoPoint, Mode, ScenarioConfig};

fn geometry(c: &mut Criterion) {
    let a = GeoPoint::new(-95.36, 29.76).unwrap();
    let b = GeoPoint::new(-87.63, 41.88).unwrap();
    c.bench_function("great_circle_miles", |bench| bench.iter(|| great_circle_miles(black_box(a), black_box(b))));

    let scenario = synthetic(200, 20, 1);
    let rail = scenario.networks.get(Mode::Rail).expect("rail network");
    let nodes: Vec<_> = rail.nodes().iter().map(|n| n.id.clone()).collect();
    let (from, to) = (&nodes[0], &nodes[nodes.len() - 1]);
    c.bench_function("rail_shortest_path", |bench| {
        bench.iter(|| rail.shortest_path_miles(black_box(from), black_box(to), 2025).unwrap())
    });
    c.bench_function("rail_nearest_node", |bench| bench.iter(|| rail.nearest_node(black_box(a), 2025)));
    c.bench_function("route_planner_build", |bench| {
        bench.iter(|| RoutePlanner::new(&scenario.networks, &scenario.sources, &scenario.sinks))
    });
}

fn replication(c: &mut Criterion) {
    let mut group = c.benchmark_group("replication");
    group.sample_size(10);
    for (n_sources, n_sinks) in [(200, 20), (1000, 60)] {
        let scenario = synthetic(n_sources, n_sinks, 2);
        let engine = Engine::new(&scenario);
        for alg in [Algorithm::Mpfy, Algorithm::Acay] {
            let cfg = ScenarioConfig { algorithm: alg, ..scenario.config.clone() };
            group.bench_function(format!("{alg}_{n_sources}x{n_sinks}"), |bench| {
                bench.iter(|| engine.run(&cfg, 7).unwrap().totals.total_tonnes)
            });
        }
    }
    group.finish();
}

criterion_group!(benches, geometry, replication);
criterion_main!(benches);
