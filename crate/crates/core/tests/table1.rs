mod common;

use std::time::{Duration, Instant};

use rwa_core::solver::feasible_metric_pairs;
use rwa_core::{solve_exact, solve_oracle, SolveStatus, SolverOptions, Variant};

use common::{config, table1};

#[test]
fn fixture_reproduces_the_three_designs() {
    let start = Instant::now();
    let (t, m) = table1();
    let pairs = feasible_metric_pairs(&t, &m, t.capacity()).unwrap();

    // usage only: optimum 3, attained with two channels
    let min_wlu = pairs.iter().map(|p| p.1).min().unwrap();
    assert_eq!(min_wlu, 3);
    assert!(pairs.contains(&(2, 3)));

    // count only: optimum 1, and a one-channel solution using 4 links exists
    let wc = solve_exact(&t, &m, &config(Variant::RwaWc, &t), &SolverOptions::default()).unwrap();
    assert_eq!((wc.status, wc.wavelength_count), (SolveStatus::Optimal, 1));
    assert_eq!(pairs.iter().map(|p| p.0).min(), Some(1));
    assert!(pairs.contains(&(1, 4)));

    // lexicographic
    let cfg = config(Variant::RwaIntwc, &t);
    let int = solve_exact(&t, &m, &cfg, &SolverOptions::default()).unwrap();
    assert_eq!((int.status, int.wavelength_count, int.wavelength_link_usage), (SolveStatus::Optimal, 1, 3));
    assert_eq!(solve_oracle(&t, &m, &cfg).unwrap().objective_value, int.objective_value);
    assert!(start.elapsed() < Duration::from_secs(1));
}

#[test]
fn both_demands_can_use_link_e_d_on_a_shortest_route() {
    let (t, m) = table1();
    let e_d = t.links().iter().find(|l| (l.src.0, l.dst.0) == (4, 3)).unwrap().id.0;
    for d in &m.demands {
        let paths = common::simple_paths(&t, d.src.0, d.dst.0);
        let shortest = paths.iter().map(Vec::len).min().unwrap();
        assert!(paths.iter().any(|p| p.len() == shortest && p.contains(&e_d)), "demand {}", d.id);
    }
}
