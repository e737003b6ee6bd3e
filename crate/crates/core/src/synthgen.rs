//! Synthetic dynamic hypergraphs with planted change points.
//!
//! Nodes carry cluster labels that evolve through scheduled events; every
//! snapshot is sampled from a small hypergraph stochastic block model in
//! which each hyperedge is drawn either entirely inside one cluster or
//! uniformly over all alive nodes.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::ingest::SnapshotSequence;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Event {
    /// Move a fraction of nodes to a different existing cluster each.
    Reassign { fraction: f64 },
    /// Open a new cluster and move a fraction of nodes into it.
    AddCluster { fraction: f64 },
    /// Append new nodes, all labelled with the newest cluster.
    AddNodes { count: usize },
    /// Dissolve a random cluster, scattering its nodes over the survivors.
    RemoveCluster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledChange {
    pub time: usize,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub initial_nodes: usize,
    pub initial_clusters: usize,
    pub num_snapshots: usize,
    pub schedule: Vec<ScheduledChange>,
    pub edges_per_snapshot: usize,
    pub min_edge_size: usize,
    pub max_edge_size: usize,
    /// Relative weight of within-cluster hyperedges.
    pub p_in: f64,
    /// Relative weight of uniformly mixed hyperedges.
    pub p_out: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        default_scenario()
    }
}

/// Sixty nodes in three clusters over 150 snapshots, with a reassignment
/// at t = 30, a new cluster at 60, a new cluster plus ten new nodes at 90,
/// and a cluster removal at 120.
pub fn default_scenario() -> ScenarioConfig {
    ScenarioConfig {
        initial_nodes: 60,
        initial_clusters: 3,
        num_snapshots: 150,
        schedule: vec![
            ScheduledChange {
                time: 30,
                events: vec![Event::Reassign { fraction: 0.2 }],
            },
            ScheduledChange {
                time: 60,
                events: vec![Event::AddCluster { fraction: 0.25 }],
            },
            ScheduledChange {
                time: 90,
                events: vec![Event::AddCluster { fraction: 0.1 }, Event::AddNodes { count: 10 }],
            },
            ScheduledChange {
                time: 120,
                events: vec![Event::RemoveCluster],
            },
        ],
        edges_per_snapshot: 120,
        min_edge_size: 2,
        max_edge_size: 5,
        p_in: 0.9,
        p_out: 0.1,
        seed: 20_240_506,
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Scenario(m));
        if self.initial_nodes == 0 || self.initial_clusters == 0 {
            return fail("need at least one node and one cluster".into());
        }
        if self.initial_clusters > self.initial_nodes {
            return fail("more clusters than nodes".into());
        }
        let mut prev = 0;
        for c in &self.schedule {
            if c.time <= prev || c.time >= self.num_snapshots {
                return fail(format!(
                    "change time {} must be strictly increasing inside (0, {})",
                    c.time, self.num_snapshots
                ));
            }
            prev = c.time;
            for e in &c.events {
                if let Event::Reassign { fraction } | Event::AddCluster { fraction } = e {
                    if !(0.0..=1.0).contains(fraction) {
                        return fail(format!("fraction {fraction} outside [0, 1]"));
                    }
                }
            }
        }
        if !(self.p_in > self.p_out && self.p_out > 0.0) {
            return fail(format!("need p_in > p_out > 0, got {} and {}", self.p_in, self.p_out));
        }
        if self.min_edge_size < 2
            || self.min_edge_size > self.max_edge_size
            || self.max_edge_size > self.initial_nodes
        {
            return fail(format!(
                "edge size range [{}, {}] not inside [2, {}]",
                self.min_edge_size, self.max_edge_size, self.initial_nodes
            ));
        }
        Ok(())
    }

    pub fn change_times(&self) -> Vec<usize> {
        self.schedule.iter().map(|c| c.time).collect()
    }

    /// Probability that a hyperedge is drawn inside a single cluster.
    pub fn within_probability(&self) -> f64 {
        self.p_in / (self.p_in + self.p_out)
    }
}

/// Node → cluster assignment over the alive nodes `0..len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    /// Alive cluster labels in creation order.
    clusters: Vec<usize>,
    next_label: usize,
}

impl Partition {
    /// Contiguous equal-as-possible blocks.
    pub fn blocks(nodes: usize, clusters: usize) -> Self {
        assert!(clusters >= 1 && clusters <= nodes.max(1));
        Self {
            assignment: (0..nodes).map(|i| i * clusters / nodes).collect(),
            clusters: (0..clusters).collect(),
            next_label: clusters,
        }
    }

    pub fn from_assignment(assignment: Vec<usize>) -> Self {
        let mut clusters: Vec<usize> = assignment.clone();
        clusters.sort_unstable();
        clusters.dedup();
        let next_label = clusters.last().map_or(0, |&c| c + 1);
        Self {
            assignment,
            clusters,
            next_label,
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[usize] {
        &self.clusters
    }

    pub fn label(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.assignment[v] == cluster).collect()
    }

    fn pick_nodes<R: Rng>(&self, fraction: f64, rng: &mut R) -> Vec<usize> {
        let count = ((fraction * self.len() as f64).round() as usize).min(self.len());
        let mut picked = index::sample(rng, self.len(), count).into_vec();
        picked.sort_unstable();
        picked
    }
}

pub fn apply_event<R: Rng>(partition: &Partition, event: &Event, rng: &mut R) -> Result<Partition> {
    let mut p = partition.clone();
    match *event {
        Event::Reassign { fraction } => {
            let moved = p.pick_nodes(fraction, rng);
            if moved.is_empty() {
                return Ok(p);
            }
            if p.num_clusters() < 2 {
                return Err(Error::Scenario("reassignment needs at least two clusters".into()));
            }
            for v in moved {
                let others: Vec<usize> = p.clusters.iter().copied().filter(|&c| c != p.assignment[v]).collect();
                p.assignment[v] = others[rng.random_range(0..others.len())];
            }
        }
        Event::AddCluster { fraction } => {
            let label = p.next_label;
            p.next_label += 1;
            p.clusters.push(label);
            for v in p.pick_nodes(fraction, rng) {
                p.assignment[v] = label;
            }
        }
        Event::AddNodes { count } => {
            let label = *p
                .clusters
                .last()
                .ok_or_else(|| Error::Scenario("cannot add nodes to an empty partition".into()))?;
            p.assignment.extend(std::iter::repeat_n(label, count));
        }
        Event::RemoveCluster => {
            if p.num_clusters() < 2 {
                return Err(Error::Scenario("cannot remove the last cluster".into()));
            }
            let gone = p.clusters.remove(rng.random_range(0..p.clusters.len()));
            for v in 0..p.len() {
                if p.assignment[v] == gone {
                    p.assignment[v] = p.clusters[rng.random_range(0..p.clusters.len())];
                }
            }
        }
    }
    Ok(p)
}

/// Parameters of the per-snapshot hypergraph sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerParams {
    pub edges: usize,
    pub min_size: usize,
    pub max_size: usize,
    /// Probability that an edge is drawn inside one cluster.
    pub within: f64,
}

impl From<&ScenarioConfig> for SamplerParams {
    fn from(c: &ScenarioConfig) -> Self {
        Self {
            edges: c.edges_per_snapshot,
            min_size: c.min_edge_size,
            max_size: c.max_edge_size,
            within: c.within_probability(),
        }
    }
}

/// Draw the member lists of one snapshot's hyperedges over the alive nodes.
pub fn sample_edges<R: Rng>(partition: &Partition, params: &SamplerParams, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    let n = partition.len();
    if n < 2 {
        return Err(Error::Scenario("need at least two alive nodes to sample edges".into()));
    }
    let members: Vec<Vec<usize>> = partition.clusters().iter().map(|&c| partition.members(c)).collect();
    let mut out = Vec::with_capacity(params.edges);
    for _ in 0..params.edges {
        let size = rng.random_range(params.min_size..=params.max_size).min(n);
        let within = rng.random::<f64>() < params.within;
        let nodes = if within {
            // cluster chosen proportionally to its size
            let mut r = rng.random_range(0..n);
            let cluster = members
                .iter()
                .position(|m| {
                    if r < m.len() {
                        true
                    } else {
                        r -= m.len();
                        false
                    }
                })
                .expect("cluster sizes sum to n");
            let pool = &members[cluster];
            if pool.len() >= size {
                index::sample(rng, pool.len(), size).into_iter().map(|i| pool[i]).collect()
            } else {
                index::sample(rng, n, size).into_vec()
            }
        } else {
            index::sample(rng, n, size).into_vec()
        };
        out.push(nodes);
    }
    Ok(out)
}

/// One unit-weight snapshot over a universe of `universe ≥ partition.len()`
/// nodes; nodes beyond the partition are isolated.
pub fn sample_snapshot<S: Scalar, R: Rng>(
    partition: &Partition,
    params: &SamplerParams,
    universe: usize,
    rng: &mut R,
) -> Result<Hypergraph<S>> {
    let edges = sample_edges(partition, params, rng)?;
    Hypergraph::with_labels(
        node_labels(universe.max(partition.len())),
        edges.into_iter().map(|e| (e, S::one())),
    )
}

pub fn node_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub changes: Vec<usize>,
    pub n_by_t: Vec<usize>,
    #[serde(skip)]
    pub partitions: Vec<Partition>,
}

/// RNG stream of one dataset: the master seed picks the key, the dataset
/// index the ChaCha stream.
pub fn dataset_rng(master_seed: u64, dataset: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(dataset);
    rng
}

/// Generate dataset number `dataset` of a scenario. Pure in
/// `(config, dataset)`.
pub fn generate_sequence<S: Scalar>(
    config: &ScenarioConfig,
    dataset: u64,
) -> Result<(SnapshotSequence<S>, GroundTruth)> {
    config.validate()?;
    let mut rng = dataset_rng(config.seed, dataset);
    let mut partition = Partition::blocks(config.initial_nodes, config.initial_clusters);
    let mut partitions = Vec::with_capacity(config.num_snapshots);
    let mut schedule = config.schedule.iter().peekable();
    for t in 0..config.num_snapshots {
        if let Some(change) = schedule.next_if(|c| c.time == t) {
            for e in &change.events {
                partition = apply_event(&partition, e, &mut rng)?;
            }
        }
        partitions.push(partition.clone());
    }
    let universe = partitions.iter().map(Partition::len).max().unwrap_or(0);
    let params = SamplerParams::from(config);
    let mut snapshots = Vec::with_capacity(config.num_snapshots);
    for p in &partitions {
        snapshots.push(sample_snapshot::<S, _>(p, &params, universe, &mut rng)?);
    }
    let times = (0..config.num_snapshots as i64).collect();
    let sequence = SnapshotSequence::new(node_labels(universe), times, snapshots)?;
    let truth = GroundTruth {
        changes: config.change_times(),
        n_by_t: partitions.iter().map(Partition::len).collect(),
        partitions,
    };
    Ok((sequence, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    #[test]
    fn default_schedule() {
        let c = default_scenario();
        c.validate().unwrap();
        assert_eq!(c.change_times(), vec![30, 60, 90, 120]);
        assert_eq!(c.num_snapshots, 150);
    }

    #[test]
    fn default_segments() {
        let (seq, truth) = generate_sequence::<f64>(&default_scenario(), 0).unwrap();
        assert_eq!(seq.len(), 150);
        assert_eq!(truth.changes, vec![30, 60, 90, 120]);
        for t in 0..150 {
            assert_eq!(truth.n_by_t[t], if t < 90 { 60 } else { 70 });
        }
        let clusters: Vec<usize> = [0, 30, 60, 90, 120]
            .iter()
            .map(|&t| truth.partitions[t].num_clusters())
            .collect();
        assert_eq!(clusters, vec![3, 3, 4, 5, 4]);
    }

    #[test]
    fn partition_only_changes_on_schedule() {
        let (_, truth) = generate_sequence::<f64>(&default_scenario(), 3).unwrap();
        for t in 1..150 {
            let same = truth.partitions[t] == truth.partitions[t - 1];
            assert_eq!(same, ![30, 60, 90, 120].contains(&t), "t = {t}");
            let p = &truth.partitions[t];
            assert!(p.assignment().iter().all(|c| p.clusters().contains(c)));
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let c = default_scenario();
        let (a, ta) = generate_sequence::<f64>(&c, 5).unwrap();
        let (b, tb) = generate_sequence::<f64>(&c, 5).unwrap();
        assert_eq!(a.to_records(), b.to_records());
        assert_eq!(ta, tb);
        let (other, _) = generate_sequence::<f64>(&c, 6).unwrap();
        assert_ne!(a.to_records(), other.to_records());
    }

    #[test]
    fn remove_cluster_on_two_clusters() {
        let p = Partition::blocks(10, 2);
        let q = apply_event(&p, &Event::RemoveCluster, &mut rng()).unwrap();
        assert_eq!(q.num_clusters(), 1);
        let survivor = q.clusters()[0];
        assert!(q.assignment().iter().all(|&c| c == survivor));
        assert!(apply_event(&q, &Event::RemoveCluster, &mut rng()).is_err());
    }

    #[test]
    fn add_nodes_grows_universe() {
        let p = Partition::blocks(60, 3);
        let p = apply_event(&p, &Event::AddCluster { fraction: 0.1 }, &mut rng()).unwrap();
        let q = apply_event(&p, &Event::AddNodes { count: 10 }, &mut rng()).unwrap();
        assert_eq!(q.len(), 70);
        assert!((60..70).all(|v| q.label(v) == 3));
    }

    #[test]
    fn zero_reassignment_is_identity() {
        let p = Partition::blocks(30, 3);
        assert_eq!(apply_event(&p, &Event::Reassign { fraction: 0.0 }, &mut rng()).unwrap(), p);
        let q = apply_event(&p, &Event::Reassign { fraction: 0.2 }, &mut rng()).unwrap();
        let moved = (0..30).filter(|&v| p.label(v) != q.label(v)).count();
        assert_eq!(moved, 6);
    }

    #[test]
    fn pure_block_sampling() {
        let p = Partition::blocks(20, 1);
        let params = SamplerParams {
            edges: 200,
            min_size: 2,
            max_size: 5,
            within: 1.0,
        };
        let edges = sample_edges(&p, &params, &mut rng()).unwrap();
        assert!(edges.iter().all(|e| (2..=5).contains(&e.len())));

        let p = Partition::blocks(30, 3);
        let edges = sample_edges(&p, &params, &mut rng()).unwrap();
        assert!(edges.iter().all(|e| e.iter().all(|&v| p.label(v) == p.label(e[0]))));
    }

    #[test]
    fn uniform_sampling_has_no_block_structure() {
        let p = Partition::blocks(60, 3);
        let params = SamplerParams {
            edges: 10_000,
            min_size: 2,
            max_size: 5,
            within: 0.0,
        };
        let edges = sample_edges(&p, &params, &mut rng()).unwrap();
        let inside = edges
            .iter()
            .filter(|e| e.iter().all(|&v| p.label(v) == p.label(e[0])))
            .count() as f64
            / edges.len() as f64;
        // Chance that 2..5 uniform members share a cluster is ≈ 0.13.
        assert!(inside < 0.2, "{inside}");
    }

    #[test]
    fn default_block_structure_is_nearly_diagonal() {
        let c = default_scenario();
        let p = Partition::blocks(60, 3);
        let params = SamplerParams {
            edges: 10_000,
            ..SamplerParams::from(&c)
        };
        let edges = sample_edges(&p, &params, &mut rng()).unwrap();
        let inside = edges
            .iter()
            .filter(|e| e.iter().all(|&v| p.label(v) == p.label(e[0])))
            .count() as f64
            / edges.len() as f64;
        assert!(inside >= 0.85 && inside > c.within_probability() - 0.05, "{inside}");
    }

    #[test]
    fn invalid_scenarios() {
        let mut c = default_scenario();
        c.schedule[1].time = 20;
        assert!(c.validate().is_err());
        let mut c = default_scenario();
        c.p_out = 0.0;
        assert!(c.validate().is_err());
        let mut c = default_scenario();
        c.min_edge_size = 1;
        assert!(c.validate().is_err());
        let mut c = default_scenario();
        c.num_snapshots = 100;
        assert!(matches!(c.validate(), Err(Error::Scenario(_))));
    }
}
