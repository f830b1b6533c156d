use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vfdeploy::engine::{self, PositionLog};
use vfdeploy::experiment::{self, DemandRule, ExperimentPlan};
use vfdeploy::{generate_scenario, Placement, Scenario, SimConfig, Variant};

#[derive(Parser)]
#[command(name = "vfdeploy", version, about = "Demand-driven multi-robot deployment simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep variants, robot counts, areas and seeds; write raw.csv and summary.csv.
    Run(RunArgs),
    /// Run one scenario file and print the report as key=value lines.
    Replay(ReplayArgs),
    /// Generate a scenario file.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PlacementArg {
    Center,
    Uniform,
}

impl From<PlacementArg> for Placement {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::Center => Placement::CenterCluster,
            PlacementArg::Uniform => Placement::UniformRandom,
        }
    }
}

/// Overrides for individual simulation parameters.
#[derive(Args, Default)]
struct ConfigArgs {
    #[arg(long)]
    area_width: Option<f64>,
    #[arg(long)]
    area_height: Option<f64>,
    #[arg(long)]
    comm_range: Option<f64>,
    #[arg(long)]
    dist_threshold: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    speed: Option<f64>,
    #[arg(long)]
    wait_time: Option<f64>,
    #[arg(long)]
    wait_slots: Option<u64>,
    #[arg(long)]
    travel_window: Option<f64>,
    #[arg(long)]
    max_slots: Option<u64>,
    #[arg(long)]
    zero_force_patience: Option<u32>,
    #[arg(long)]
    repulsive_only_patience: Option<u32>,
    #[arg(long)]
    force_epsilon: Option<f64>,
    #[arg(long)]
    fingerprint_step: Option<f64>,
    #[arg(long)]
    fingerprint_square: Option<f64>,
    #[arg(long)]
    trace_radius: Option<f64>,
    #[arg(long)]
    min_ds: Option<f64>,
    #[arg(long)]
    rng_seed: Option<u64>,
}

impl ConfigArgs {
    fn apply(&self, config: &mut SimConfig) -> Result<(), String> {
        let s = |v: Option<f64>| v.map(|x| x.to_string());
        let u = |v: Option<u64>| v.map(|x| x.to_string());
        let n = |v: Option<u32>| v.map(|x| x.to_string());
        let pairs = [
            ("area_width", s(self.area_width)),
            ("area_height", s(self.area_height)),
            ("comm_range", s(self.comm_range)),
            ("dist_threshold", s(self.dist_threshold)),
            ("alpha", s(self.alpha)),
            ("speed", s(self.speed)),
            ("wait_time", s(self.wait_time)),
            ("wait_slots", u(self.wait_slots)),
            ("travel_window", s(self.travel_window)),
            ("max_slots", u(self.max_slots)),
            ("zero_force_patience", n(self.zero_force_patience)),
            ("repulsive_only_patience", n(self.repulsive_only_patience)),
            ("force_epsilon", s(self.force_epsilon)),
            ("fingerprint_step", s(self.fingerprint_step)),
            ("fingerprint_square", s(self.fingerprint_square)),
            ("trace_radius", s(self.trace_radius)),
            ("min_ds", s(self.min_ds)),
            ("rng_seed", u(self.rng_seed)),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                config.set(key, &v).map_err(|e| e.to_string())?;
            }
        }
        config.validate().map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_delimiter = ',', default_value = "two_hop,cover_baseline,centralized")]
    variants: Vec<Variant>,
    #[arg(long, value_delimiter = ',', default_value = "15,20,25,30,35")]
    robots: Vec<usize>,
    /// `equal`, `fixed:N` or `times:K`.
    #[arg(long, default_value = "equal", value_parser = parse_demand)]
    demand: DemandRule,
    #[arg(long, default_value_t = 10)]
    landmarks: usize,
    /// Areas as WIDTHxHEIGHT.
    #[arg(long, value_delimiter = ',', default_value = "150x150", value_parser = parse_area)]
    areas: Vec<(f64, f64)>,
    #[arg(long, default_value_t = 30)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    plan_seed: u64,
    #[arg(long, value_enum, default_value = "center")]
    placement: PlacementArg,
    #[arg(long, env = "VFDEPLOY_OUT", default_value = "out")]
    output_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct ReplayArgs {
    scenario: PathBuf,
    #[arg(long, default_value = "two_hop")]
    variant: Variant,
    /// Write the per-slot position log here.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 15)]
    robots: usize,
    #[arg(long, default_value_t = 10)]
    landmarks: usize,
    /// Total demand; defaults to the robot count.
    #[arg(long)]
    demand: Option<u32>,
    #[arg(long, value_enum, default_value = "center")]
    placement: PlacementArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

fn parse_demand(s: &str) -> Result<DemandRule, String> {
    let bad = || format!("expected `equal`, `fixed:N` or `times:K`, got `{s}`");
    match s.split_once(':') {
        None if s == "equal" => Ok(DemandRule::EqualToRobots),
        Some(("fixed", n)) => n.parse().map(DemandRule::Fixed).map_err(|_| bad()),
        Some(("times", k)) => k.parse().map(DemandRule::TimesRobots).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn parse_area(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s.split_once('x').ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let num = |v: &str| v.parse::<f64>().map_err(|_| format!("bad area dimension `{v}`"));
    Ok((num(w)?, num(h)?))
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut config = SimConfig::default();
    args.config.apply(&mut config).map_err(Failure::Usage)?;
    let plan = ExperimentPlan {
        variants: args.variants,
        robot_counts: args.robots,
        demand_rule: args.demand,
        landmarks: args.landmarks,
        areas: args.areas,
        seeds: args.seeds,
        plan_seed: args.plan_seed,
        placement: args.placement.into(),
        config,
    };
    plan.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let rt = |e: vfdeploy::ExperimentError| Failure::Runtime(e.to_string());
    fs::create_dir_all(&args.output_dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", args.output_dir.display())))?;
    let rows = plan.execute().map_err(rt)?;
    experiment::write_raw(&args.output_dir.join("raw.csv"), &plan, &rows).map_err(rt)?;
    experiment::write_summary(&args.output_dir.join("summary.csv"), &experiment::summarize(&rows)).map_err(rt)?;
    let truncated = rows.iter().filter(|r| r.report.truncated).count();
    eprintln!("{} runs written to {} ({truncated} truncated)", rows.len(), args.output_dir.display());
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.scenario)
        .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", args.scenario.display())))?;
    let scenario =
        Scenario::from_text(&text).map_err(|e| Failure::Usage(format!("{}: {e}", args.scenario.display())))?;
    let report = match &args.trajectory {
        None => engine::run(&scenario, args.variant),
        Some(path) => {
            let mut log = PositionLog::default();
            let report = engine::run_with_observer(&scenario, args.variant, &mut log);
            let mut body = String::from(PositionLog::HEADER);
            body.push('\n');
            for row in &log.rows {
                body.push_str(row);
                body.push('\n');
            }
            fs::write(path, body).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
            report
        }
    };
    print!("{}", report.to_key_values());
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let mut config = SimConfig::default();
    args.config.apply(&mut config).map_err(Failure::Usage)?;
    let demand = args.demand.unwrap_or(args.robots as u32);
    let scenario = generate_scenario(&config, args.robots, args.landmarks, demand, args.placement.into())
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let text = scenario.to_text();
    match args.out {
        Some(path) => {
            fs::write(&path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
