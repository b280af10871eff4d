//! `ccus`: run simulations, sweeps and generators from scenario files.
//!
//! Exit status is 0 on success, 1 for bad input (flags, files, values)
//! and 2 for failures while producing output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ccus_core::experiment::{
    default_cost_grid, default_duration_grid, default_share_grid, write_batch, write_sweeps, CostTarget, Runner,
};
use ccus_core::io::{
    generate_candidate_sinks, generate_synthetic_scenario, load_scenario, write_candidates, BBox, PopulationGrid,
    SiteParams, SyntheticParams,
};
use ccus_core::{Algorithm, Error, ScenarioConfig};

#[derive(Parser, Debug)]
#[command(name = "ccus", version, about = "CO2 capture, transport and storage market simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a batch of replications and write per-replication outputs.
    Run(RunArgs),
    /// Run a sensitivity sweep.
    Sweep(SweepArgs),
    /// Generate candidate storage sites by clustering a scenario's sources.
    GenSites(GenSitesArgs),
    /// Generate a synthetic scenario directory.
    GenScenario(GenScenarioArgs),
    /// Check a scenario file and its inputs.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario's matching algorithm.
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    /// Overrides the scenario's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per batch.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SweepKind {
    Cost,
    Duration,
    Share,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    kind: SweepKind,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated parameter values; defaults depend on the kind.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Comma-separated cost targets for `--kind cost`.
    #[arg(long, value_delimiter = ',', value_parser = parse_target)]
    targets: Option<Vec<CostTarget>>,
}

#[derive(Args, Debug)]
struct GenSitesArgs {
    /// Scenario whose sources and networks are clustered.
    #[arg(long)]
    scenario: PathBuf,
    /// Population grid CSV (`lon,lat,daytime_count,nighttime_count`).
    #[arg(long)]
    population: Option<PathBuf>,
    /// Output CSV in the sink layout.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    cluster_radius: f64,
    #[arg(long, default_value_t = 25.0)]
    pop_radius: f64,
    #[arg(long, default_value_t = 1000.0)]
    pop_threshold: f64,
    #[arg(long, default_value_t = 120)]
    max_sites: usize,
}

#[derive(Args, Debug)]
struct GenScenarioArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    sources: usize,
    #[arg(long, default_value_t = 20)]
    sinks: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `min_lon,min_lat,max_lon,max_lat`
    #[arg(long, value_delimiter = ',', num_args = 4)]
    bbox: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    scenario: PathBuf,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|e| e.to_string())
}

fn parse_target(s: &str) -> Result<CostTarget, String> {
    s.parse::<CostTarget>().map_err(|e| e.to_string())
}

/// Splits failures by exit status.
enum Failure {
    Input(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load_config(common: &Common) -> Result<ScenarioConfig, Failure> {
    let mut cfg = read_config(&common.scenario)?;
    if let Some(a) = common.algorithm {
        cfg.algorithm = a;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.reps == 0 {
        return Err(Failure::Input("--reps must be at least 1".into()));
    }
    Ok(cfg)
}

fn read_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    ScenarioConfig::from_file(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.common)?;
    let scenario = load_scenario(&cfg)?;
    let runner = Runner::new(&scenario, args.common.jobs)?;
    let batch = runner.run_replications(&cfg, args.common.reps, cfg.seed)?;
    write_batch(&args.out, &batch, &cfg, cfg.seed)?;
    let s = &batch.summary;
    println!(
        "{} replication(s), {}: median total {:.6e} t, mean {:.6e} t",
        batch.results.len(),
        cfg.algorithm,
        s.total_tonnes.median,
        s.total_tonnes.mean
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.common)?;
    if args.targets.is_some() && !matches!(args.kind, SweepKind::Cost) {
        return Err(Failure::Input("--targets only applies to --kind cost".into()));
    }
    let scenario = load_scenario(&cfg)?;
    let runner = Runner::new(&scenario, args.common.jobs)?;
    let (n, seed) = (args.common.reps, cfg.seed);
    let sweeps = match args.kind {
        SweepKind::Cost => {
            let values = args.values.clone().unwrap_or_else(default_cost_grid);
            let targets = args.targets.clone().unwrap_or_else(|| CostTarget::ALL.to_vec());
            runner.sweep_cost_multipliers(&cfg, &values, &targets, n, seed)?
        }
        SweepKind::Duration => {
            let years = match &args.values {
                Some(v) => v
                    .iter()
                    .map(|&y| {
                        if y.fract() == 0.0 && y >= 0.0 && y <= f64::from(u32::MAX) {
                            Ok(y as u32)
                        } else {
                            Err(Failure::Input(format!("duration must be a whole number of years, got {y}")))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                None => default_duration_grid(),
            };
            vec![runner.sweep_mandated_duration(&cfg, &years, n, seed)?]
        }
        SweepKind::Share => {
            let values = args.values.clone().unwrap_or_else(default_share_grid);
            vec![runner.sweep_revenue_share(&cfg, &values, n, seed)?]
        }
    };
    write_sweeps(&args.out, &sweeps)?;
    let rows: usize = sweeps.iter().map(|s| s.points.len()).sum();
    println!("{rows} sweep point(s) written to {}", args.out.join("sweep.csv").display());
    Ok(())
}

fn gen_sites(args: &GenSitesArgs) -> Result<(), Failure> {
    let cfg = read_config(&args.scenario)?;
    let scenario = load_scenario(&cfg)?;
    if scenario.networks.is_empty() {
        return Err(Failure::Input("scenario has no transport networks".into()));
    }
    let pop = match &args.population {
        Some(p) => PopulationGrid::load(p).map_err(|e| Failure::from(Error::from(e)))?,
        None => PopulationGrid::default(),
    };
    let params = SiteParams {
        cluster_radius_miles: args.cluster_radius,
        pop_radius_miles: args.pop_radius,
        pop_threshold: args.pop_threshold,
        max_sites: args.max_sites,
    };
    let sites = generate_candidate_sinks(&scenario.sources, &scenario.networks, &pop, &params);
    write_candidates(&args.out, &sites, cfg.first_year)?;
    println!("{} candidate site(s) written to {}", sites.len(), args.out.display());
    Ok(())
}

fn gen_scenario(args: &GenScenarioArgs) -> Result<(), Failure> {
    let mut params = SyntheticParams {
        n_sources: args.sources,
        n_sinks: args.sinks,
        seed: args.seed,
        ..Default::default()
    };
    if let Some(b) = &args.bbox {
        params.bbox = BBox {
            min_lon: b[0],
            min_lat: b[1],
            max_lon: b[2],
            max_lat: b[3],
        };
    }
    let generated = generate_synthetic_scenario(&params)?;
    let cfg = ScenarioConfig {
        seed: args.seed,
        ..Default::default()
    };
    let path = generated.write(&args.out, &cfg)?;
    println!("scenario written to {}", path.display());
    Ok(())
}

fn validate(args: &ValidateArgs) -> Result<(), Failure> {
    let cfg = read_config(&args.scenario)?;
    let violations = cfg.validate();
    for v in &violations {
        println!("violation: {v}");
    }
    if !violations.is_empty() {
        return Err(Failure::Input(format!("{} violation(s)", violations.len())));
    }
    let scenario = load_scenario(&cfg)?;
    println!(
        "ok: {} sources, {} sinks, {} network(s)",
        scenario.sources.len(),
        scenario.sinks.len(),
        scenario.networks.iter().count()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if informational { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::GenSites(a) => gen_sites(a),
        Command::GenScenario(a) => gen_scenario(a),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Input(m) => (1, m),
                Failure::Runtime(m) => (2, m),
            };
            eprintln!("error: {}", msg.replace('\n', " "));
            log::debug!("exiting with status {code}");
            ExitCode::from(code)
        }
    }
}
