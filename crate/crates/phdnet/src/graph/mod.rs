//! The weighted directed exchange network and its time slices.
//!
//! Edges run employer -> trainer: W[i][j] counts doctorates that employer i
//! hired from awarding unit j. Self-loops (an institution hiring its own
//! graduates) stay on the diagonal.

mod export;
mod synth;

pub use export::{export, import_edge_list, GraphFormat};
pub use synth::{synthesize_market, MarketSpec};

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{HireRecord, InstitutionRegistry};

/// How a time window selects records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceMode {
    /// Records with employment year inside `[start_year, end_year]`.
    Windowed,
    /// Records with employment year up to and including `end_year`.
    #[default]
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start_year: i32,
    pub end_year: i32,
    pub mode: SliceMode,
}

impl TimeWindow {
    pub fn windowed(start_year: i32, end_year: i32) -> Self {
        Self { start_year, end_year, mode: SliceMode::Windowed }
    }

    pub fn cumulative(end_year: i32) -> Self {
        Self { start_year: i32::MIN, end_year, mode: SliceMode::Cumulative }
    }

    /// Window covering every admissible year.
    pub fn full() -> Self {
        Self::cumulative(i32::MAX)
    }

    pub fn contains(&self, year: i32) -> bool {
        match self.mode {
            SliceMode::Windowed => (self.start_year..=self.end_year).contains(&year),
            SliceMode::Cumulative => year <= self.end_year,
        }
    }

    /// Short label used in output file columns, e.g. `1980-2000` or `2014`.
    pub fn label(&self) -> String {
        match self.mode {
            SliceMode::Windowed => format!("{}-{}", self.start_year, self.end_year),
            SliceMode::Cumulative => format!("{}", self.end_year),
        }
    }
}

/// Weighted directed adjacency over a deterministic node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeNetwork {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    weights: Vec<Vec<u64>>,
    pub window: TimeWindow,
}

impl ExchangeNetwork {
    /// Builds a network directly from a node list and weight matrix.
    ///
    /// Nodes are re-sorted lexicographically (with the matrix permuted to
    /// match) so that equality is representation independent.
    pub fn from_weights(nodes: Vec<String>, weights: Vec<Vec<u64>>, window: TimeWindow) -> Result<Self> {
        let n = nodes.len();
        if weights.len() != n || weights.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!("weight matrix must be {n}x{n}")));
        }
        {
            let distinct: BTreeSet<&String> = nodes.iter().collect();
            if distinct.len() != n {
                return Err(Error::Config("duplicate node ids".into()));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| nodes[a].cmp(&nodes[b]));
        let sorted_nodes: Vec<String> = order.iter().map(|&i| nodes[i].clone()).collect();
        let sorted_weights: Vec<Vec<u64>> = order
            .iter()
            .map(|&i| order.iter().map(|&j| weights[i][j]).collect())
            .collect();
        let index = sorted_nodes.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
        Ok(Self { nodes: sorted_nodes, index, weights: sorted_weights, window })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn weight(&self, employer: usize, trainer: usize) -> u64 {
        self.weights[employer][trainer]
    }

    pub fn weight_between(&self, employer: &str, trainer: &str) -> u64 {
        match (self.index_of(employer), self.index_of(trainer)) {
            (Some(i), Some(j)) => self.weights[i][j],
            _ => 0,
        }
    }

    /// Total hires made by one employer (row sum).
    pub fn out_weight(&self, employer: usize) -> u64 {
        self.weights[employer].iter().sum()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().flatten().sum()
    }

    /// Iterates positive entries as `(employer, trainer, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.weights.iter().enumerate().flat_map(|(i, row)| {
            row.iter().enumerate().filter(|(_, &w)| w > 0).map(move |(j, &w)| (i, j, w))
        })
    }

    pub fn weights(&self) -> &[Vec<u64>] {
        &self.weights
    }
}

/// Descriptive statistics of one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub node_count: usize,
    /// Distinct ordered pairs with positive weight, self-loops included.
    pub directed_edge_count: usize,
    pub total_weight: u64,
    pub mean_in_degree: f64,
    pub mean_out_degree: f64,
    /// Nodes with zero in-degree and zero out-degree.
    pub isolated_node_count: usize,
}

/// Builds the exchange network for one window.
///
/// The node set is the union of institutions appearing in any admitted record
/// plus registry entries tagged `always_include`; for windowed builds, nodes
/// with no in-window activity are dropped (pass `keep_inactive` through
/// [`build_network_with`] to override).
pub fn build_network(
    records: &[HireRecord],
    registry: &InstitutionRegistry,
    window: TimeWindow,
) -> ExchangeNetwork {
    let keep_inactive = matches!(window.mode, SliceMode::Cumulative);
    build_network_with(records, registry, window, keep_inactive)
}

pub fn build_network_with(
    records: &[HireRecord],
    registry: &InstitutionRegistry,
    window: TimeWindow,
    keep_inactive: bool,
) -> ExchangeNetwork {
    let in_window: Vec<&HireRecord> =
        records.iter().filter(|r| window.contains(r.employment_year)).collect();

    let mut node_set: BTreeSet<String> = BTreeSet::new();
    let source: Box<dyn Iterator<Item = &HireRecord>> = if keep_inactive {
        Box::new(records.iter())
    } else {
        Box::new(in_window.iter().copied())
    };
    for record in source {
        node_set.insert(record.employer_unit.clone());
        node_set.insert(record.degree_unit.clone());
    }
    node_set.extend(registry.always_include_ids());

    let nodes: Vec<String> = node_set.into_iter().collect();
    let index: HashMap<String, usize> =
        nodes.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
    let n = nodes.len();
    let mut weights = vec![vec![0u64; n]; n];
    for record in &in_window {
        let i = index[&record.employer_unit];
        let j = index[&record.degree_unit];
        weights[i][j] += 1;
    }
    ExchangeNetwork { nodes, index, weights, window }
}

/// Splits records into per-period or nested networks at the given cut points.
///
/// Windowed mode with boundaries `b1 < b2 < ... < bk` yields k disjoint
/// networks covering `[min_year, b1]`, `[b1+1, b2]`, ..., `[b(k-1)+1, bk]`.
/// Cumulative mode yields k nested networks, each over all years `<= bi`.
pub fn slice(
    records: &[HireRecord],
    registry: &InstitutionRegistry,
    boundaries: &[i32],
    mode: SliceMode,
) -> Result<Vec<ExchangeNetwork>> {
    if boundaries.is_empty() {
        return Err(Error::Config("slice boundaries must be non-empty".into()));
    }
    if boundaries.windows(2).any(|pair| pair[0] >= pair[1]) {
        return Err(Error::Config(format!(
            "slice boundaries must be strictly increasing, got {boundaries:?}"
        )));
    }
    let min_year = records.iter().map(|r| r.employment_year).min().unwrap_or(boundaries[0]);
    let mut networks = Vec::with_capacity(boundaries.len());
    for (i, &end) in boundaries.iter().enumerate() {
        let window = match mode {
            SliceMode::Windowed => {
                let start = if i == 0 { min_year.min(end) } else { boundaries[i - 1] + 1 };
                TimeWindow::windowed(start, end)
            }
            SliceMode::Cumulative => TimeWindow::cumulative(end),
        };
        networks.push(build_network(records, registry, window));
    }
    Ok(networks)
}

/// Computes node, edge, weight and degree statistics.
pub fn network_stats(network: &ExchangeNetwork) -> NetworkStats {
    let node_count = network.node_count();
    let mut directed_edge_count = 0usize;
    let mut total_weight = 0u64;
    let mut has_out = vec![false; node_count];
    let mut has_in = vec![false; node_count];
    for (i, j, w) in network.edges() {
        directed_edge_count += 1;
        total_weight += w;
        has_out[i] = true;
        has_in[j] = true;
    }
    let isolated_node_count = (0..node_count).filter(|&v| !has_out[v] && !has_in[v]).count();
    let mean = if node_count == 0 { 0.0 } else { directed_edge_count as f64 / node_count as f64 };
    NetworkStats {
        node_count,
        directed_edge_count,
        total_weight,
        mean_in_degree: mean,
        mean_out_degree: mean,
        isolated_node_count,
    }
}
