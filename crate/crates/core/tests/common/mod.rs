#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use delaytomo::{build_routing_matrix, enumerate_simple_paths, select_paths, PathSet, RoutingMatrix, SelectionStrategy, Topology};
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load(topo: &str, paths: &str) -> PathSet {
    let topology = Topology::parse(&std::fs::read_to_string(fixture(topo)).unwrap()).unwrap();
    PathSet::parse(Arc::new(topology), &std::fs::read_to_string(fixture(paths)).unwrap()).unwrap()
}

pub fn routing(topo: &str, paths: &str) -> RoutingMatrix {
    build_routing_matrix(&load(topo, paths)).unwrap()
}

/// Random network with 4..=9 nodes and a random selection of 2..=10 of its
/// simple paths, restricted to the links those paths cover.
pub fn random_routing<R: Rng>(rng: &mut R) -> Option<RoutingMatrix> {
    let nodes = rng.gen_range(4..=9);
    let max_links = (nodes * (nodes - 1) / 2).min(2 * nodes);
    let links = rng.gen_range(nodes - 1..=max_links);
    let topology = Topology::random_connected(nodes, links, rng).ok()?;
    let all = enumerate_simple_paths(Arc::new(topology), 300, None).ok()?;
    let count = rng.gen_range(2..=all.len().min(10));
    let chosen = select_paths(&all, count, SelectionStrategy::Random, rng.gen()).ok()?;
    build_routing_matrix(&chosen.restrict_to_covered_links().ok()?).ok()
}
