//! `rwa`: topology inspection, traffic generation, exact solving, model
//! export, solution validation and benchmark runs.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when an instance
//! has no solution or a solution fails validation.

mod bench;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rwa_core::{
    build_model, check_solution, export_model, generate_traffic, solve_exact, DesignConfig, ExportFormat, LoadLevel,
    NetworkTopology, NodeId, RwaSolution, SolverOptions, TrafficMatrix, Variant,
};

#[derive(Parser)]
#[command(name = "rwa", version, about = "Exact routing and wavelength assignment for WDM networks")]
struct Cli {
    /// Directory searched for input files that do not exist as given.
    #[arg(long, global = true, env = "RWA_DATA_DIR", value_name = "DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print size, capacity and degree statistics of a topology.
    Topology(TopologyArgs),
    /// Generate a seeded traffic matrix.
    GenTraffic(GenTrafficArgs),
    /// Solve one instance to optimality (or until a limit is reached).
    Solve(SolveArgs),
    /// Write the ILP of one instance in LP or MPS format.
    Export(ExportArgs),
    /// Check a solution file against an instance.
    Validate(ValidateArgs),
    /// Run a designs x topologies x loads x seeds experiment.
    Bench(bench::BenchArgs),
}

#[derive(Args)]
struct TopologyArgs {
    /// Topology file or bundled name (cost239, nsfnet).
    #[arg(long, value_name = "FILE|NAME")]
    topology: String,
    /// Also list the outgoing and incoming links of this node.
    #[arg(long, value_name = "V")]
    node: Option<usize>,
    /// Print the topology in its file format instead of the summary.
    #[arg(long)]
    raw: bool,
}

#[derive(Args)]
struct GenTrafficArgs {
    #[arg(long, value_name = "FILE|NAME")]
    topology: String,
    #[arg(long, value_parser = parse_load)]
    load: LoadLevel,
    /// Mark every demand as protected.
    #[arg(long, default_value = "0", value_parser = clap::value_parser!(u8).range(0..=1))]
    protected: u8,
    #[arg(long)]
    seed: u64,
    /// Defaults to standard output.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    /// Topology file or bundled name (cost239, nsfnet).
    #[arg(long, value_name = "FILE|NAME")]
    topology: String,
    #[arg(long, value_name = "FILE")]
    traffic: PathBuf,
    /// One of rwa_wc, rwa_wc_p, rwa_intwc, rwa_intwc_p.
    #[arg(long, value_parser = Variant::from_str)]
    design: Variant,
    /// Wavelengths per link; defaults to the topology's capacity.
    #[arg(long, value_name = "N")]
    wavelengths: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_name = "SECONDS", default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, value_name = "N", default_value_t = 1)]
    threads: usize,
    /// Stop after this many search nodes.
    #[arg(long, value_name = "N")]
    node_limit: Option<u64>,
    /// Defaults to standard output.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_parser = ExportFormat::from_str, default_value = "lp")]
    format: ExportFormat,
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_name = "FILE")]
    solution: PathBuf,
    /// Where to write the JSON report; defaults to standard output.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn parse_load(s: &str) -> Result<LoadLevel, String> {
    match s.parse()? {
        LoadLevel::Custom => Err("custom load cannot be generated; use low, medium or high".into()),
        load => Ok(load),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let data = cli.data_dir.as_deref();
    match cli.command {
        Command::Topology(args) => topology(args, data),
        Command::GenTraffic(args) => gen_traffic(args, data),
        Command::Solve(args) => solve(args, data),
        Command::Export(args) => export(args, data),
        Command::Validate(args) => validate(args, data),
        Command::Bench(args) => bench::run(args, data),
    }
}

/// `path` itself if it exists, otherwise `path` under the data directory.
pub(crate) fn locate(path: &Path, data: Option<&Path>) -> Option<PathBuf> {
    if path.is_file() {
        return Some(path.to_path_buf());
    }
    let joined = data?.join(path);
    joined.is_file().then_some(joined)
}

fn read_input(path: &Path, data: Option<&Path>) -> Result<String> {
    let found = locate(path, data).with_context(|| format!("input file not found: {}", path.display()))?;
    fs::read_to_string(&found).with_context(|| format!("cannot read {}", found.display()))
}

/// Resolves a file path, `<name>.topo` in the data directory, or a bundled name.
pub(crate) fn load_topology(arg: &str, data: Option<&Path>) -> Result<NetworkTopology> {
    let found = locate(Path::new(arg), data).or_else(|| locate(Path::new(&format!("{arg}.topo")), data));
    match found {
        Some(path) => {
            let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
            NetworkTopology::parse(&text).with_context(|| format!("cannot parse topology {}", path.display()))
        }
        None => NetworkTopology::bundled(arg)
            .with_context(|| format!("`{arg}` is neither a topology file nor a bundled topology (cost239, nsfnet)")),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Instance {
    topology: NetworkTopology,
    traffic: TrafficMatrix,
    cfg: DesignConfig,
}

fn load_instance(args: &InstanceArgs, data: Option<&Path>) -> Result<Instance> {
    let mut topology = load_topology(&args.topology, data)?;
    if let Some(n) = args.wavelengths {
        topology = topology.with_capacity(n).context("invalid --wavelengths")?;
    }
    let text = read_input(&args.traffic, data)?;
    let traffic = TrafficMatrix::parse_for(&text, &topology)
        .with_context(|| format!("cannot parse traffic {}", args.traffic.display()))?;
    let cfg = DesignConfig::new(args.design, &topology);
    cfg.check_instance(&topology, &traffic)?;
    Ok(Instance { topology, traffic, cfg })
}

fn topology(args: TopologyArgs, data: Option<&Path>) -> Result<ExitCode> {
    let t = load_topology(&args.topology, data)?;
    if args.raw {
        print!("{}", t.to_text());
        return Ok(ExitCode::SUCCESS);
    }
    let stats = t.node_degree_stats();
    println!("name: {}", t.name());
    println!("nodes: {}", t.node_count());
    println!("links: {}", t.link_count());
    println!("capacity: {}", t.capacity());
    println!("bidirectional: {}", t.is_bidirectional());
    println!(
        "degree: min {} max {} mean {:.3}",
        stats.min,
        stats.max,
        *stats.mean.numer() as f64 / *stats.mean.denom() as f64
    );
    if let Some(v) = args.node {
        let (out, inc) = t.adjacency(NodeId(v))?;
        let fmt = |links: &[rwa_core::FiberLink]| {
            links.iter().map(|l| format!("{}:{}->{}", l.id, l.src, l.dst)).collect::<Vec<_>>().join(" ")
        };
        println!("node {v} out: {}", fmt(&out));
        println!("node {v} in: {}", fmt(&inc));
    }
    Ok(ExitCode::SUCCESS)
}

fn gen_traffic(args: GenTrafficArgs, data: Option<&Path>) -> Result<ExitCode> {
    let t = load_topology(&args.topology, data)?;
    let traffic = generate_traffic(&t, args.load, args.protected == 1, args.seed);
    emit(args.output.as_deref(), &traffic.to_text())?;
    eprintln!("{} demands on {} ({} load, seed {})", traffic.len(), t.name(), args.load, args.seed);
    Ok(ExitCode::SUCCESS)
}

fn solve(args: SolveArgs, data: Option<&Path>) -> Result<ExitCode> {
    if !(args.time_limit.is_finite() && args.time_limit > 0.0) {
        bail!("--time-limit must be a positive number of seconds");
    }
    if args.threads == 0 {
        bail!("--threads must be at least 1");
    }
    let inst = load_instance(&args.instance, data)?;
    let options = SolverOptions {
        time_limit: Duration::from_secs_f64(args.time_limit),
        thread_count: args.threads,
        node_limit: args.node_limit,
    };
    let start = Instant::now();
    let solution = solve_exact(&inst.topology, &inst.traffic, &inst.cfg, &options)?;
    let elapsed = start.elapsed().as_secs_f64();
    if solution.status.has_solution() {
        let report = check_solution(&inst.topology, &inst.traffic, &inst.cfg, &solution);
        if !report.valid {
            bail!("solver produced an invalid solution: {}", report.violations[0]);
        }
    }
    emit(args.output.as_deref(), &solution.to_json())?;
    eprintln!(
        "{}: {} WC={} WLU={} objective={} ({elapsed:.2} s)",
        inst.cfg.variant,
        solution.status,
        solution.wavelength_count,
        solution.wavelength_link_usage,
        rwa_core::model::rational_to_string(&solution.objective_value)
    );
    Ok(if solution.status.has_solution() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn export(args: ExportArgs, data: Option<&Path>) -> Result<ExitCode> {
    let inst = load_instance(&args.instance, data)?;
    let model = build_model(&inst.topology, &inst.traffic, &inst.cfg)?;
    emit(args.output.as_deref(), &export_model(&model, args.format))?;
    eprintln!("{} variables, {} constraints", model.variables.len(), model.constraints.len());
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs, data: Option<&Path>) -> Result<ExitCode> {
    let inst = load_instance(&args.instance, data)?;
    let text = read_input(&args.solution, data)?;
    let solution =
        RwaSolution::from_json(&text).with_context(|| format!("cannot parse solution {}", args.solution.display()))?;
    let report = check_solution(&inst.topology, &inst.traffic, &inst.cfg, &solution);
    emit(args.output.as_deref(), &report.to_json())?;
    if report.valid {
        eprintln!("valid");
        return Ok(ExitCode::SUCCESS);
    }
    for v in &report.violations {
        eprintln!("{v}");
    }
    Ok(ExitCode::from(2))
}
