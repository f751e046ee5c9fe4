//! `rwa bench`: plan files, resumable JSON-lines results and tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rwa_core::experiment::{
    default_seeds, parse_records, render_table, run_experiment, CellStatus, ExperimentPlan, ExperimentRecord,
    ExperimentResult, TableFormat,
};
use rwa_core::{LoadLevel, SolverOptions, Variant};
use serde::Deserialize;

pub const RESULTS_FILE: &str = "results.jsonl";

#[derive(Args)]
pub struct BenchArgs {
    /// JSON plan file; cannot be combined with the inline grid flags.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["topologies", "loads", "designs", "seeds", "capacity"])]
    plan: Option<PathBuf>,
    /// Topology files or bundled names [default: cost239,nsfnet].
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    topologies: Vec<String>,
    /// [default: low]
    #[arg(long, value_delimiter = ',', value_name = "LIST", value_parser = crate::parse_load)]
    loads: Vec<LoadLevel>,
    /// [default: all four designs]
    #[arg(long, value_delimiter = ',', value_name = "LIST", value_parser = Variant::from_str)]
    designs: Vec<Variant>,
    /// Seeds as a list and/or ranges, e.g. `1-10` or `1,4,7` [default: 1-10].
    #[arg(long, value_name = "LIST", value_parser = parse_seeds)]
    seeds: Option<Seeds>,
    /// Wavelength override for one topology, by topology name. Repeatable.
    #[arg(long, value_name = "NAME=N", value_parser = parse_capacity)]
    capacity: Vec<(String, usize)>,
    /// Per-cell solver time limit.
    #[arg(long, value_name = "SECONDS")]
    time_limit: Option<f64>,
    /// Search threads per cell.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    #[arg(long, value_name = "N")]
    node_limit: Option<u64>,
    /// Cells solved concurrently.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Directory for results.jsonl, table.csv and table.md; existing results are resumed.
    #[arg(long, value_name = "DIR")]
    output: PathBuf,
    /// Table written to standard output.
    #[arg(long, value_parser = TableFormat::from_str, default_value = "markdown")]
    format: TableFormat,
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim) {
        let bad = || format!("invalid seed list `{s}`");
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(Seeds(seeds))
}

fn parse_capacity(s: &str) -> Result<(String, usize), String> {
    let (name, n) = s.split_once('=').ok_or_else(|| format!("expected NAME=N, got `{s}`"))?;
    let n = n.parse().map_err(|_| format!("invalid wavelength count in `{s}`"))?;
    Ok((name.to_string(), n))
}

/// On-disk plan. Missing fields take the same defaults as the inline flags.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    #[serde(default = "default_topologies")]
    topologies: Vec<String>,
    #[serde(default = "default_loads")]
    loads: Vec<LoadLevel>,
    #[serde(default = "default_variants")]
    variants: Vec<Variant>,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
    #[serde(default)]
    capacity: BTreeMap<String, usize>,
    time_limit: Option<f64>,
    threads: Option<usize>,
    node_limit: Option<u64>,
    jobs: Option<usize>,
}

fn default_topologies() -> Vec<String> {
    vec!["cost239".into(), "nsfnet".into()]
}

fn default_loads() -> Vec<LoadLevel> {
    vec![LoadLevel::Low]
}

fn default_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}

impl PlanFile {
    fn from_args(args: &BenchArgs, data: Option<&Path>) -> Result<Self> {
        let mut plan = match &args.plan {
            Some(path) => {
                let text = crate::read_input(path, data)?;
                serde_json::from_str::<PlanFile>(&text)
                    .with_context(|| format!("cannot parse plan {}", path.display()))?
            }
            None => PlanFile {
                topologies: if args.topologies.is_empty() { default_topologies() } else { args.topologies.clone() },
                loads: if args.loads.is_empty() { default_loads() } else { args.loads.clone() },
                variants: if args.designs.is_empty() { default_variants() } else { args.designs.clone() },
                seeds: args.seeds.clone().map_or_else(default_seeds, |s| s.0),
                capacity: args.capacity.iter().cloned().collect(),
                time_limit: None,
                threads: None,
                node_limit: None,
                jobs: None,
            },
        };
        plan.time_limit = args.time_limit.or(plan.time_limit);
        plan.threads = args.threads.or(plan.threads);
        plan.node_limit = args.node_limit.or(plan.node_limit);
        plan.jobs = args.jobs.or(plan.jobs);
        Ok(plan)
    }

    fn resolve(self, data: Option<&Path>) -> Result<ExperimentPlan> {
        let time_limit = self.time_limit.unwrap_or(60.0);
        if !(time_limit.is_finite() && time_limit > 0.0) {
            bail!("time limit must be a positive number of seconds");
        }
        let threads = self.threads.unwrap_or(1);
        if threads == 0 {
            bail!("threads must be at least 1");
        }
        let topologies = self.topologies.iter().map(|t| crate::load_topology(t, data)).collect::<Result<Vec<_>>>()?;
        let solver = SolverOptions {
            time_limit: Duration::from_secs_f64(time_limit),
            thread_count: threads,
            node_limit: self.node_limit,
        };
        let plan = ExperimentPlan {
            topologies,
            loads: self.loads,
            variants: self.variants,
            seeds: self.seeds,
            capacity: self.capacity,
            solver,
            jobs: self.jobs.unwrap_or(1),
        };
        plan.check().map_err(|e| anyhow!("invalid plan: {e}"))?;
        Ok(plan)
    }
}

type Key = (String, LoadLevel, Variant, u64);

fn plan_keys(plan: &ExperimentPlan) -> BTreeSet<Key> {
    let mut keys = BTreeSet::new();
    for t in &plan.topologies {
        for &load in &plan.loads {
            for &variant in &plan.variants {
                for &seed in &plan.seeds {
                    keys.insert((t.name().to_string(), load, variant, seed));
                }
            }
        }
    }
    keys
}

pub fn run(args: BenchArgs, data: Option<&Path>) -> Result<ExitCode> {
    let plan = PlanFile::from_args(&args, data)?.resolve(data)?;
    let keys = plan_keys(&plan);
    fs::create_dir_all(&args.output).with_context(|| format!("cannot create {}", args.output.display()))?;
    let results_path = args.output.join(RESULTS_FILE);

    // Later lines win, so a cell re-run after an error replaces the old record.
    let mut previous: BTreeMap<Key, ExperimentRecord> = BTreeMap::new();
    if results_path.exists() {
        let text = fs::read_to_string(&results_path)?;
        let records = parse_records(&text).with_context(|| format!("cannot parse {}", results_path.display()))?;
        for r in records {
            previous.insert(r.key(), r);
        }
    }
    let (in_plan, outside): (Vec<_>, Vec<_>) = previous.into_values().partition(|r| keys.contains(&r.key()));
    let done: Vec<_> = in_plan.into_iter().filter(|r| r.status != CellStatus::Error).collect();
    let todo = keys.len() - done.len();
    eprintln!("{} cells, {} already done, {todo} to run", keys.len(), done.len());

    let file = OpenOptions::new().create(true).append(true).open(&results_path)?;
    let sink = Mutex::new(file);
    let finished = AtomicUsize::new(0);
    let on_record = |r: &ExperimentRecord| {
        let mut file = sink.lock().expect("results lock");
        if let Err(e) = writeln!(file, "{}", r.to_json_line()) {
            eprintln!("warning: cannot append to {}: {e}", results_path.display());
        }
        let k = finished.fetch_add(1, Ordering::Relaxed) + 1;
        let status = serde_json::to_value(r.status).expect("status serializes");
        eprintln!(
            "[{k}/{todo}] {} {} {} seed {}: {} WC={} WLU={} ({:.2} s){}",
            r.topology,
            r.load,
            r.variant,
            r.seed,
            status.as_str().unwrap_or_default(),
            r.wavelength_count,
            r.wavelength_link_usage,
            r.solve_time,
            r.error.as_deref().map(|e| format!(" {e}")).unwrap_or_default()
        );
    };
    let result = run_experiment(&plan, done, &on_record).map_err(|e| anyhow!(e))?;
    drop(sink);

    let mut all = outside;
    all.extend(result.records.iter().cloned());
    fs::write(&results_path, ExperimentResult::from_records(all).to_json_lines())?;
    let csv = render_table(&result, TableFormat::Csv);
    let markdown = render_table(&result, TableFormat::Markdown);
    fs::write(args.output.join("table.csv"), &csv)?;
    fs::write(args.output.join("table.md"), &markdown)?;
    print!("{}", if args.format == TableFormat::Csv { &csv } else { &markdown });

    let flagged = result.cells().iter().filter(|c| !c.fully_optimal()).count();
    if flagged > 0 {
        eprintln!("{flagged} cell(s) not fully optimal; their averages use optimal seeds only");
    }
    Ok(ExitCode::SUCCESS)
}
