//! Exact multi-objective routing and wavelength assignment (RWA) for
//! transparent WDM networks.
//!
//! The crate builds the binary ILP of the joint wavelength-count /
//! wavelength-link-usage design problem (optionally with dedicated 1+1 path
//! protection), exports it to LP/MPS, and solves it with a built-in
//! branch-and-bound whose lexicographic weights guarantee that the number of
//! wavelengths is minimized before link usage is considered.
//!
//! ```
//! use rwa_core::{solve_exact, DesignConfig, NetworkTopology, SolverOptions, TrafficMatrix, LoadLevel, Variant};
//!
//! let ring = NetworkTopology::from_fiber_pairs("ring", 3, 2, &[(0, 1), (1, 2), (2, 0)]).unwrap();
//! let traffic = TrafficMatrix::from_pairs([(0, 1, false)], 0, LoadLevel::Custom).unwrap();
//! let cfg = DesignConfig::new(Variant::RwaIntwc, &ring);
//! let solution = solve_exact(&ring, &traffic, &cfg, &SolverOptions::default()).unwrap();
//! assert_eq!((solution.wavelength_count, solution.wavelength_link_usage), (1, 1));
//! ```

pub mod error;
pub mod experiment;
pub mod model;
pub mod solver;
pub mod topology;
pub mod traffic;
pub mod validate;

pub use error::{ParseError, RwaError};
pub use model::{
    build_model, export_model, lexicographic_weights, DesignConfig, ExportFormat, IlpModel, Rational, VariableRef,
    Variant, WeightPair,
};
pub use solver::{
    solve_exact, solve_heuristic, solve_oracle, Lightpath, Role, RwaSolution, SolveStatus, SolverOptions,
};
pub use topology::{FiberLink, LinkId, NetworkTopology, NodeId};
pub use traffic::{generate_traffic, Demand, LoadLevel, TrafficMatrix};
pub use validate::{check_solution, compute_metrics, ValidationReport};
