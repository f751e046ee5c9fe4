//! Benchmark protocol: designs x topologies x load levels x seeded instances.
//!
//! Every `(topology, load, seed)` triple produces one demand set that all
//! designs share; protected designs see the same demands with every
//! protection flag set. Records are persisted as JSON lines and the run can
//! be resumed from them. Cell averages only use proven-optimal records.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::{DesignConfig, Variant};
use crate::solver::{solve_exact, SolveStatus, SolverOptions};
use crate::topology::NetworkTopology;
use crate::traffic::{generate_traffic, LoadLevel};
use crate::validate::check_solution;

/// Seeds used when a plan does not name any: `1..=10`.
pub fn default_seeds() -> Vec<u64> {
    (1..=10).collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub topologies: Vec<NetworkTopology>,
    pub loads: Vec<LoadLevel>,
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
    /// Wavelengths per link keyed by topology name; replaces the file value.
    pub capacity: BTreeMap<String, usize>,
    pub solver: SolverOptions,
    /// Cells solved concurrently.
    pub jobs: usize,
}

impl ExperimentPlan {
    /// Full grid on `topologies` with default seeds and a single job.
    pub fn new(topologies: Vec<NetworkTopology>, solver: SolverOptions) -> Self {
        ExperimentPlan {
            topologies,
            loads: LoadLevel::GENERATED.to_vec(),
            variants: Variant::ALL.to_vec(),
            seeds: default_seeds(),
            capacity: BTreeMap::new(),
            solver,
            jobs: 1,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.topologies.is_empty() || self.loads.is_empty() || self.variants.is_empty() || self.seeds.is_empty() {
            return Err("plan needs at least one topology, load, variant and seed".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err("plan seeds must be distinct".into());
        }
        if self.loads.contains(&LoadLevel::Custom) {
            return Err("custom load cannot be generated".into());
        }
        let names: BTreeSet<&str> = self.topologies.iter().map(NetworkTopology::name).collect();
        if names.len() != self.topologies.len() {
            return Err("topology names must be distinct".into());
        }
        if let Some(name) = self.capacity.keys().find(|n| !names.contains(n.as_str())) {
            return Err(format!("capacity override for unknown topology `{name}`"));
        }
        if self.capacity.values().any(|&c| c == 0) {
            return Err("capacity overrides must be positive".into());
        }
        if self.jobs == 0 {
            return Err("jobs must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Optimal,
    Feasible,
    Infeasible,
    Timeout,
    /// Solver error or a solution rejected by the validator.
    Error,
}

impl From<SolveStatus> for CellStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => CellStatus::Optimal,
            SolveStatus::Feasible => CellStatus::Feasible,
            SolveStatus::Infeasible => CellStatus::Infeasible,
            SolveStatus::Timeout => CellStatus::Timeout,
        }
    }
}

/// One solved instance; one JSON line in the results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub topology: String,
    pub load: LoadLevel,
    pub variant: Variant,
    pub seed: u64,
    pub wavelength_count: usize,
    pub wavelength_link_usage: usize,
    pub status: CellStatus,
    /// Seconds.
    pub solve_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn key(&self) -> (String, LoadLevel, Variant, u64) {
        (self.topology.clone(), self.load, self.variant, self.seed)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Parses a JSON-lines results file, skipping blank lines.
pub fn parse_records(text: &str) -> Result<Vec<ExperimentRecord>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

/// Averages of one `(topology, load, variant)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub topology: String,
    pub load: LoadLevel,
    pub variant: Variant,
    pub records: usize,
    pub optimal: usize,
    pub wc_avg: Option<f64>,
    pub wlu_avg: Option<f64>,
    /// `1 - WLU(lexicographic) / WLU(single-objective)` over seeds where
    /// both designs are optimal; lexicographic rows only.
    pub saving: Option<f64>,
}

impl CellSummary {
    pub fn fully_optimal(&self) -> bool {
        self.records > 0 && self.optimal == self.records
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    /// Sorted by `(topology, load, variant, seed)`.
    pub records: Vec<ExperimentRecord>,
}

impl ExperimentResult {
    pub fn from_records(mut records: Vec<ExperimentRecord>) -> Self {
        records.sort_by_key(ExperimentRecord::key);
        ExperimentResult { records }
    }

    fn cell_records(&self, topology: &str, load: LoadLevel, variant: Variant) -> Vec<&ExperimentRecord> {
        self.records.iter().filter(|r| r.topology == topology && r.load == load && r.variant == variant).collect()
    }

    pub fn cell(&self, topology: &str, load: LoadLevel, variant: Variant) -> Option<CellSummary> {
        let records = self.cell_records(topology, load, variant);
        if records.is_empty() {
            return None;
        }
        let optimal: Vec<_> = records.iter().filter(|r| r.status == CellStatus::Optimal).collect();
        let avg = |f: &dyn Fn(&ExperimentRecord) -> usize| {
            (!optimal.is_empty()).then(|| optimal.iter().map(|r| f(r) as f64).sum::<f64>() / optimal.len() as f64)
        };
        let saving = if variant.lexicographic() {
            let base: BTreeMap<u64, usize> = self
                .cell_records(topology, load, variant.single_objective())
                .into_iter()
                .filter(|r| r.status == CellStatus::Optimal)
                .map(|r| (r.seed, r.wavelength_link_usage))
                .collect();
            let (mut ours, mut theirs) = (0usize, 0usize);
            for r in &optimal {
                if let Some(&b) = base.get(&r.seed) {
                    ours += r.wavelength_link_usage;
                    theirs += b;
                }
            }
            (theirs > 0).then(|| 1.0 - ours as f64 / theirs as f64)
        } else {
            None
        };
        Some(CellSummary {
            topology: topology.to_string(),
            load,
            variant,
            records: records.len(),
            optimal: optimal.len(),
            wc_avg: avg(&|r| r.wavelength_count),
            wlu_avg: avg(&|r| r.wavelength_link_usage),
            saving,
        })
    }

    /// One summary per cell present, in canonical order.
    pub fn cells(&self) -> Vec<CellSummary> {
        let keys: BTreeSet<(String, LoadLevel, Variant)> =
            self.records.iter().map(|r| (r.topology.clone(), r.load, r.variant)).collect();
        keys.into_iter().filter_map(|(t, l, v)| self.cell(&t, l, v)).collect()
    }

    pub fn to_json_lines(&self) -> String {
        self.records.iter().map(|r| r.to_json_line() + "\n").collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(format!("unknown table format `{other}` (expected csv or markdown)")),
        }
    }
}

pub const TABLE_COLUMNS: [&str; 7] =
    ["topology", "load", "variant", "wc_avg", "wlu_avg", "wlu_saving", "optimal_fraction"];

/// Renders one row per cell: averages, saving against the single-objective
/// design and the fraction of optimal records.
pub fn render_table(result: &ExperimentResult, format: TableFormat) -> String {
    let cells = result.cells();
    let fmt = |v: Option<f64>, digits: usize| v.map(|x| format!("{x:.digits$}")).unwrap_or_default();
    match format {
        TableFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(TABLE_COLUMNS).expect("in-memory csv");
            for c in &cells {
                writer
                    .write_record([
                        c.topology.clone(),
                        c.load.to_string(),
                        c.variant.to_string(),
                        fmt(c.wc_avg, 2),
                        fmt(c.wlu_avg, 2),
                        fmt(c.saving, 4),
                        format!("{}/{}", c.optimal, c.records),
                    ])
                    .expect("in-memory csv");
            }
            String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("csv is utf-8")
        }
        TableFormat::Markdown => {
            let mut out = String::new();
            writeln!(out, "| {} |", TABLE_COLUMNS.join(" | ")).unwrap();
            writeln!(out, "|{}", "---|".repeat(TABLE_COLUMNS.len())).unwrap();
            for c in &cells {
                let saving = c.saving.map(|s| format!("{:.1}%", s * 100.0)).unwrap_or_else(|| "-".into());
                let flag = if c.fully_optimal() { "" } else { " (not fully optimal)" };
                writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {}/{}{} |",
                    c.topology,
                    c.load,
                    c.variant,
                    c.wc_avg.map_or("-".into(), |v| format!("{v:.2}")),
                    c.wlu_avg.map_or("-".into(), |v| format!("{v:.2}")),
                    saving,
                    c.optimal,
                    c.records,
                    flag
                )
                .unwrap();
            }
            out
        }
    }
}

struct Job<'a> {
    topology: &'a NetworkTopology,
    load: LoadLevel,
    variant: Variant,
    seed: u64,
}

fn run_job(job: &Job<'_>, solver: &SolverOptions) -> ExperimentRecord {
    let base = generate_traffic(job.topology, job.load, false, job.seed);
    let traffic = base.with_protection(job.variant.protection());
    let cfg = DesignConfig::new(job.variant, job.topology);
    let start = Instant::now();
    let outcome = solve_exact(job.topology, &traffic, &cfg, solver);
    let solve_time = start.elapsed().as_secs_f64();
    let mut record = ExperimentRecord {
        topology: job.topology.name().to_string(),
        load: job.load,
        variant: job.variant,
        seed: job.seed,
        wavelength_count: 0,
        wavelength_link_usage: 0,
        status: CellStatus::Error,
        solve_time,
        error: None,
    };
    match outcome {
        Err(e) => record.error = Some(e.to_string()),
        Ok(solution) => {
            record.wavelength_count = solution.wavelength_count;
            record.wavelength_link_usage = solution.wavelength_link_usage;
            record.status = solution.status.into();
            if solution.status.has_solution() {
                let report = check_solution(job.topology, &traffic, &cfg, &solution);
                if !report.valid {
                    record.status = CellStatus::Error;
                    let first = report.violations.first().map(ToString::to_string).unwrap_or_default();
                    record.error = Some(format!("validator rejected solution: {first}"));
                }
            }
        }
    }
    record
}

/// Runs every cell of `plan` not already present in `done`, reporting each
/// new record to `on_record` as it completes. Returns `done` plus the new
/// records in canonical order.
pub fn run_experiment(
    plan: &ExperimentPlan,
    done: Vec<ExperimentRecord>,
    on_record: &(dyn Fn(&ExperimentRecord) + Sync),
) -> Result<ExperimentResult, String> {
    plan.check()?;
    let topologies = plan
        .topologies
        .iter()
        .map(|t| match plan.capacity.get(t.name()) {
            Some(&c) => t.with_capacity(c).map_err(|e| e.to_string()),
            None => Ok(t.clone()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let finished: BTreeSet<_> = done.iter().map(ExperimentRecord::key).collect();
    let mut jobs = Vec::new();
    for topology in &topologies {
        for &load in &plan.loads {
            for &seed in &plan.seeds {
                for &variant in &plan.variants {
                    if !finished.contains(&(topology.name().to_string(), load, variant, seed)) {
                        jobs.push(Job { topology, load, variant, seed });
                    }
                }
            }
        }
    }
    let next = AtomicUsize::new(0);
    let records = Mutex::new(done);
    std::thread::scope(|scope| {
        for _ in 0..plan.jobs.min(jobs.len()).max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let record = run_job(job, &plan.solver);
                on_record(&record);
                records.lock().expect("records lock").push(record);
            });
        }
    });
    Ok(ExperimentResult::from_records(records.into_inner().expect("records lock")))
}
