//! Benchmark inputs shared by the criterion targets.

use rwa_core::{generate_traffic, DesignConfig, LoadLevel, NetworkTopology, TrafficMatrix, Variant};

/// A seeded COST239 instance with `capacity` wavelengths per link.
pub fn cost239_instance(load: LoadLevel, variant: Variant, seed: u64, capacity: usize) -> Instance {
    let topology = NetworkTopology::cost239().with_capacity(capacity).expect("positive capacity");
    let traffic = generate_traffic(&topology, load, variant.protection(), seed);
    let cfg = DesignConfig::new(variant, &topology);
    Instance { topology, traffic, cfg }
}

pub struct Instance {
    pub topology: NetworkTopology,
    pub traffic: TrafficMatrix,
    pub cfg: DesignConfig,
}
