//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p rwa-core --test acceptance`. The per-cell time
//! limit of the COST239 grid defaults to 45 s and can be changed through
//! `RWA_CELL_SECS`.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rwa_core::experiment::{CellStatus, ExperimentRecord, ExperimentResult};
use rwa_core::model::ConstraintClass;
use rwa_core::solver::feasible_metric_pairs;
use rwa_core::{
    build_model, check_solution, generate_traffic, solve_exact, solve_oracle, LoadLevel, NetworkTopology, Role,
    RwaSolution, SolveStatus, SolverOptions, TrafficMatrix, Variant,
};

use common::{config, micro, mutants, table1};

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Working and protection of every protected demand: link-disjoint, one channel.
fn protection_ok(traffic: &TrafficMatrix, s: &RwaSolution) -> bool {
    traffic.demands.iter().filter(|d| d.protected).all(|d| {
        let find = |role| s.lightpaths.iter().find(|l| l.demand == d.id && l.role == role);
        match (find(Role::Working), find(Role::Protection)) {
            (Some(w), Some(p)) => {
                let links: HashSet<_> = w.links.iter().collect();
                w.channel == p.channel && p.links.iter().all(|l| !links.contains(l))
            }
            _ => false,
        }
    })
}

fn oracle_equivalence(protected_optimal: &mut Vec<(TrafficMatrix, RwaSolution)>) -> Line {
    let start = Instant::now();
    let (mut compared, mut mismatches, mut infeasible) = (0, Vec::new(), 0);
    for seed in 0..150 {
        let m = micro(seed);
        let variants: &[Variant] =
            if m.traffic.protected_count() > 0 { &[Variant::RwaWcP, Variant::RwaIntwcP] } else { &Variant::ALL };
        for &variant in variants {
            let cfg = config(variant, &m.topology);
            let exact = solve_exact(&m.topology, &m.traffic, &cfg, &SolverOptions::default()).unwrap();
            let oracle = solve_oracle(&m.topology, &m.traffic, &cfg).unwrap();
            compared += 1;
            if (exact.status, exact.objective_value) != (oracle.status, oracle.objective_value) {
                mismatches.push(format!("seed {seed} {variant}"));
            }
            if exact.status == SolveStatus::Infeasible {
                infeasible += 1;
            }
            if exact.status == SolveStatus::Optimal && variant.protection() {
                protected_optimal.push((m.traffic.clone(), exact));
            }
        }
    }
    let elapsed = start.elapsed();
    Line {
        id: 1,
        name: "oracle equivalence on micro-instances",
        pass: compared >= 100 && mismatches.is_empty() && elapsed < Duration::from_secs(60),
        detail: format!(
            "{compared} solves ({infeasible} infeasible), {} mismatches {:?}, {:.2}s (limit 60s)",
            mismatches.len(),
            mismatches,
            elapsed.as_secs_f64()
        ),
    }
}

fn table1_fixture() -> Line {
    let start = Instant::now();
    let (t, m) = table1();
    let pairs = feasible_metric_pairs(&t, &m, t.capacity()).unwrap();
    let min_wlu = pairs.iter().map(|p| p.1).min();
    let wc = solve_exact(&t, &m, &config(Variant::RwaWc, &t), &SolverOptions::default()).unwrap();
    let int = solve_exact(&t, &m, &config(Variant::RwaIntwc, &t), &SolverOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let pass = min_wlu == Some(3)
        && pairs.contains(&(2, 3))
        && wc.status == SolveStatus::Optimal
        && wc.wavelength_count == 1
        && pairs.contains(&(1, 4))
        && int.status == SolveStatus::Optimal
        && (int.wavelength_count, int.wavelength_link_usage) == (1, 3)
        && elapsed < Duration::from_secs(1);
    Line {
        id: 3,
        name: "two-demand illustration fixture",
        pass,
        detail: format!(
            "usage-only min WLU {min_wlu:?} with (2,3) feasible: {}; count-only WC {} with (1,4) feasible: {}; \
             lexicographic ({}, {}); {:.3}s (limit 1s)",
            pairs.contains(&(2, 3)),
            wc.wavelength_count,
            pairs.contains(&(1, 4)),
            int.wavelength_count,
            int.wavelength_link_usage,
            elapsed.as_secs_f64()
        ),
    }
}

struct Grid {
    records: Vec<ExperimentRecord>,
    solutions: BTreeMap<(Variant, u64), (TrafficMatrix, RwaSolution)>,
    elapsed: Duration,
}

fn solve_grid(cell: Duration) -> Grid {
    let t = NetworkTopology::cost239();
    let start = Instant::now();
    let mut records = Vec::new();
    let mut solutions = BTreeMap::new();
    for seed in 1..=10 {
        let base = generate_traffic(&t, LoadLevel::Low, false, seed);
        for variant in Variant::ALL {
            let traffic = base.with_protection(variant.protection());
            let cfg = config(variant, &t);
            let began = Instant::now();
            let s = solve_exact(&t, &traffic, &cfg, &SolverOptions::with_time_limit(cell)).unwrap();
            let solve_time = began.elapsed().as_secs_f64();
            let mut status = CellStatus::from(s.status);
            if s.status.has_solution() && !check_solution(&t, &traffic, &cfg, &s).valid {
                status = CellStatus::Error;
            }
            println!(
                "  cell cost239/low/{variant}/seed {seed}: {} WC={} WLU={} {solve_time:.2}s",
                s.status, s.wavelength_count, s.wavelength_link_usage
            );
            records.push(ExperimentRecord {
                topology: t.name().to_string(),
                load: LoadLevel::Low,
                variant,
                seed,
                wavelength_count: s.wavelength_count,
                wavelength_link_usage: s.wavelength_link_usage,
                status,
                solve_time,
                error: None,
            });
            solutions.insert((variant, seed), (traffic, s));
        }
    }
    Grid { records, solutions, elapsed: start.elapsed() }
}

fn lexicographic_guarantee(grid: &Grid, micro_optimal: usize) -> Line {
    let mut checked = BTreeMap::new();
    let mut violations = Vec::new();
    for (single, lex) in [(Variant::RwaWc, Variant::RwaIntwc), (Variant::RwaWcP, Variant::RwaIntwcP)] {
        let mut n = 0;
        for seed in 1..=10 {
            let (_, a) = &grid.solutions[&(single, seed)];
            let (_, b) = &grid.solutions[&(lex, seed)];
            if a.status != SolveStatus::Optimal || b.status != SolveStatus::Optimal {
                continue;
            }
            n += 1;
            if a.wavelength_count != b.wavelength_count || b.wavelength_link_usage > a.wavelength_link_usage {
                violations.push(format!("{lex} seed {seed}"));
            }
        }
        checked.insert(lex.name(), n);
    }
    Line {
        id: 2,
        name: "lexicographic guarantee on the COST239 grid",
        pass: violations.is_empty() && checked.values().any(|&n| n > 0),
        detail: format!(
            "optimal pairs compared {checked:?}, violations {violations:?} (micro-instance pairs covered by \
             property tests; {micro_optimal} optimal protected micro solves)"
        ),
    }
}

fn trend(grid: &Grid) -> Line {
    let result = ExperimentResult::from_records(grid.records.clone());
    let cell = |v| result.cell("cost239", LoadLevel::Low, v).unwrap();
    let (wc, int, wcp) = (cell(Variant::RwaWc), cell(Variant::RwaIntwc), cell(Variant::RwaWcP));
    let saving = int.saving;
    let ratio = match (wcp.wc_avg, wc.wc_avg) {
        (Some(p), Some(u)) => Some(p / u),
        _ => None,
    };
    let excluded: Vec<String> = grid
        .records
        .iter()
        .filter(|r| r.status != CellStatus::Optimal)
        .map(|r| format!("{}/{}:{:?}", r.variant, r.seed, r.status))
        .collect();
    let pass = saving.is_some_and(|s| (0.05..=0.25).contains(&s))
        && ratio.is_some_and(|r| r > 1.3)
        && grid.elapsed < Duration::from_secs(1800);
    Line {
        id: 4,
        name: "trend reproduction, COST239 low load, seeds 1..10, |C|=10",
        pass,
        detail: format!(
            "WLU saving {} (band 5%..25%) over {} paired optimal seeds; WC ratio wc_p/wc {} (> 1.3) from {}/{} \
             optimal; total {:.1}s (limit 1800s); not averaged: {}",
            saving.map_or("n/a".into(), |s| format!("{:.1}%", s * 100.0)),
            grid.records
                .iter()
                .filter(|r| r.variant == Variant::RwaIntwc && r.status == CellStatus::Optimal)
                .filter(|r| grid
                    .records
                    .iter()
                    .any(|b| { b.variant == Variant::RwaWc && b.seed == r.seed && b.status == CellStatus::Optimal }))
                .count(),
            ratio.map_or("n/a".into(), |r| format!("{r:.3}")),
            wcp.optimal,
            wc.optimal,
            grid.elapsed.as_secs_f64(),
            if excluded.is_empty() { "none".to_string() } else { excluded.join(", ") }
        ),
    }
}

fn mutation_suite() -> Line {
    let case = mutants::case();
    let mut outcomes = Vec::new();
    let mut pass = true;
    for (class, mutant) in mutants::mutants(&case) {
        let report = check_solution(&case.topology, &case.traffic, &case.cfg, &mutant);
        let classes = report.classes();
        let ok = !report.valid && classes == BTreeSet::from([class]);
        pass &= ok;
        outcomes.push(format!("{}:{}", class.label(), if ok { "ok" } else { "WRONG" }));
    }
    Line { id: 5, name: "validator mutation suite", pass, detail: outcomes.join(" ") }
}

fn determinism() -> Line {
    let t = NetworkTopology::cost239();
    let m = generate_traffic(&t, LoadLevel::Low, false, 1);
    let cfg = config(Variant::RwaIntwc, &t);
    let one = SolverOptions::default();
    let runs: Vec<String> = (0..3).map(|_| solve_exact(&t, &m, &cfg, &one).unwrap().to_json()).collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    let four = SolverOptions { thread_count: 4, ..one };
    let outcomes: BTreeSet<_> = (0..5)
        .map(|_| {
            let s = solve_exact(&t, &m, &cfg, &four).unwrap();
            (s.status, s.objective_value)
        })
        .collect();
    let seq = RwaSolution::from_json(&runs[0]).unwrap();
    let agree = outcomes.len() == 1 && outcomes.contains(&(seq.status, seq.objective_value));
    Line {
        id: 6,
        name: "determinism",
        pass: identical && agree,
        detail: format!(
            "--threads 1 byte-identical over 3 runs: {identical}; --threads 4 status/objective over 5 runs: {:?} \
             (library level; the CLI repeats this in rwa-cli's tests)",
            outcomes.iter().map(|(s, o)| format!("{s}:{o}")).collect::<Vec<_>>()
        ),
    }
}

fn model_counts() -> Line {
    let mut failures = Vec::new();
    let mut instances: Vec<(NetworkTopology, TrafficMatrix, Variant)> = Vec::new();
    for seed in 200..212 {
        let mi = micro(seed);
        let v = if mi.traffic.protected_count() > 0 { Variant::RwaIntwcP } else { Variant::RwaIntwc };
        instances.push((mi.topology, mi.traffic, v));
    }
    for (i, name) in ["cost239", "nsfnet"].iter().cycle().take(8).enumerate() {
        let t = NetworkTopology::bundled(name).unwrap().with_capacity(1 + i % 4).unwrap();
        let load = LoadLevel::GENERATED[i % 3];
        let protected = i % 2 == 0;
        let m = generate_traffic(&t, load, protected, 300 + i as u64);
        instances.push((t, m, if protected { Variant::RwaWcP } else { Variant::RwaWc }));
    }
    for (k, (t, m, v)) in instances.iter().enumerate() {
        let model = build_model(t, m, &config(*v, t)).unwrap();
        let (nv, ne, nc, nd, ndp) = (t.node_count(), t.link_count(), t.capacity(), m.len(), m.protected_count());
        let expected = [
            (model.variables.len(), nd * ne * nc + ndp * ne * nc + nd * nc + ne * nc + nc),
            (model.constraint_count(ConstraintClass::Provisioning), nd),
            (model.constraint_count(ConstraintClass::WorkingFlow), nv * nd * nc),
            (model.constraint_count(ConstraintClass::ProtectionFlow), nv * ndp * nc),
            (model.constraint_count(ConstraintClass::Uniqueness), ne * nc),
            (model.constraint_count(ConstraintClass::ChannelUsage), nc),
        ];
        if expected.iter().any(|(got, want)| got != want) {
            failures.push(k);
        }
    }
    Line {
        id: 7,
        name: "model-count audit",
        pass: instances.len() == 20 && failures.is_empty(),
        detail: format!("{} instances, mismatching: {failures:?}", instances.len()),
    }
}

fn protection_disjointness(grid: &Grid, micro: &[(TrafficMatrix, RwaSolution)]) -> Line {
    let mut checked = 0;
    let mut bad = 0;
    let grid_p = grid
        .solutions
        .iter()
        .filter(|((v, _), (_, s))| v.protection() && s.status == SolveStatus::Optimal)
        .map(|(_, pair)| pair);
    for (traffic, s) in grid_p.chain(micro.iter()) {
        checked += 1;
        if !protection_ok(traffic, s) {
            bad += 1;
        }
    }
    Line {
        id: 8,
        name: "protection disjointness on optimal protected solutions",
        pass: checked > 0 && bad == 0,
        detail: format!("{checked} optimal solutions checked, {bad} violating"),
    }
}

fn main() -> ExitCode {
    let cell = std::env::var("RWA_CELL_SECS").ok().and_then(|v| v.parse().ok()).unwrap_or(45);
    let mut micro_p = Vec::new();
    let mut lines = vec![oracle_equivalence(&mut micro_p), table1_fixture()];
    println!("solving COST239 grid (per-cell limit {cell}s)");
    let grid = solve_grid(Duration::from_secs(cell));
    lines.push(lexicographic_guarantee(&grid, micro_p.len()));
    lines.push(trend(&grid));
    lines.push(mutation_suite());
    lines.push(determinism());
    lines.push(model_counts());
    lines.push(protection_disjointness(&grid, &micro_p));
    lines.sort_by_key(|l| l.id);
    println!();
    for l in &lines {
        println!("[{}] criterion {}: {} -- {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
