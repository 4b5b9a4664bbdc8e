//! Eigenvector centrality as a reputation score.
//!
//! Each hire is a reputation vote by the employer on the awarding unit, so a
//! node's score accumulates along its incoming edges weighted by the voters'
//! own scores: the dominant right eigenvector of the transposed weight
//! matrix, found by power iteration and reported max-normalized (best node at
//! exactly 1.0).
//!
//! Real hiring networks are often reducible; a pure power iteration can then
//! collapse to zero or fail to settle. An optional damping term mixes in a
//! uniform rank-one matrix scaled to the network's mean row mass, which keeps
//! the iteration strictly positive without changing what is being measured
//! when damping is small. Non-convergence is reported, never patched over.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_network_with, ExchangeNetwork, SliceMode, TimeWindow};
use crate::ingest::{HireRecord, InstitutionRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityOptions {
    /// Largest allowed change (max norm) between successive iterates.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight of the uniform teleport term, in `[0, 1)`. Zero keeps the plain
    /// eigenvector iteration.
    pub damping: f64,
}

impl Default for CentralityOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 100_000, damping: 0.0 }
    }
}

impl CentralityOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::Config(format!("damping must be in [0, 1), got {}", self.damping)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityResult {
    /// Max-normalized score per node; all in `[0, 1]`.
    pub scores: BTreeMap<String, f64>,
    /// Rayleigh estimate of the dominant eigenvalue.
    pub dominant_value: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

impl CentralityResult {
    /// Scores ordered best first, ties broken lexicographically by node id.
    pub fn ranking(&self) -> Vec<(&str, f64)> {
        let mut ranked: Vec<(&str, f64)> =
            self.scores.iter().map(|(id, &s)| (id.as_str(), s)).collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(b.0)));
        ranked
    }
}

/// One multiply `y = M^T x` where `M = (1-d) W + d * (tw/n^2) J`.
///
/// The teleport part is rank one, so it reduces to a shared additive term.
fn multiply_transposed(
    edges: &[(usize, usize, f64)],
    x: &[f64],
    y: &mut [f64],
    damping: f64,
    uniform_mass: f64,
) {
    y.fill(0.0);
    for &(i, j, w) in edges {
        y[j] += (1.0 - damping) * w * x[i];
    }
    if damping > 0.0 {
        let shared = damping * uniform_mass * x.iter().sum::<f64>();
        for v in y.iter_mut() {
            *v += shared;
        }
    }
}

/// Power iteration for the reputation scores of one network.
///
/// Scores follow incoming edges (votes received). The iterate is normalized
/// by its maximum entry each step, so a converged result is already on the
/// max-to-one scale. An all-zero network yields all-zero scores and counts as
/// converged; an iterate that collapses to zero on a nonzero network (e.g. a
/// star with no return edges) is reported as non-convergent.
pub fn eigenvector_centrality(
    network: &ExchangeNetwork,
    options: &CentralityOptions,
) -> Result<CentralityResult> {
    options.validate()?;
    let n = network.node_count();
    if n == 0 {
        return Err(Error::Dimension("centrality needs a non-empty network".into()));
    }

    let edges: Vec<(usize, usize, f64)> =
        network.edges().map(|(i, j, w)| (i, j, w as f64)).collect();
    let total_weight: f64 = edges.iter().map(|&(_, _, w)| w).sum();
    let uniform_mass = total_weight / (n as f64 * n as f64);

    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut converged = false;
    let mut iterations_used = 0;

    for iteration in 1..=options.max_iterations {
        iterations_used = iteration;
        multiply_transposed(&edges, &x, &mut y, options.damping, uniform_mass);
        let norm = y.iter().cloned().fold(0.0f64, f64::max);
        if norm == 0.0 {
            // The vote mass died out. Only trivially fine when nothing votes.
            let converged = total_weight == 0.0;
            return Ok(CentralityResult {
                scores: network.nodes().iter().cloned().map(|id| (id, 0.0)).collect(),
                dominant_value: 0.0,
                iterations_used,
                converged,
            });
        }
        for v in y.iter_mut() {
            *v /= norm;
        }
        let delta = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        x.copy_from_slice(&y);
        if delta <= options.tolerance {
            converged = true;
            break;
        }
    }

    // Rayleigh quotient on the final iterate.
    multiply_transposed(&edges, &x, &mut y, options.damping, uniform_mass);
    let dominant_value =
        x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|a| a * a).sum::<f64>();

    // The max-norm step leaves the best node at exactly 1.0 already; renormalize
    // defensively in case the last multiply moved the maximum.
    let max = x.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        for v in x.iter_mut() {
            *v /= max;
        }
    }

    Ok(CentralityResult {
        scores: network.nodes().iter().cloned().zip(x).collect(),
        dominant_value,
        iterations_used,
        converged,
    })
}

/// Reputation scores over a series of cut points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralitySeries {
    /// Stable node set shared by every column.
    pub nodes: Vec<String>,
    pub columns: Vec<SeriesColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesColumn {
    pub cut_point: i32,
    /// Window label for the column header, e.g. `2014` or `2008-2014`.
    pub label: String,
    /// Scores aligned with [`CentralitySeries::nodes`].
    pub scores: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
}

impl CentralitySeries {
    pub fn score(&self, node: &str, column: usize) -> Option<f64> {
        let idx = self.nodes.iter().position(|n| n == node)?;
        self.columns.get(column).map(|c| c.scores[idx])
    }
}

/// Computes the centrality table node x cut point on cumulative networks.
pub fn centrality_series(
    records: &[HireRecord],
    registry: &InstitutionRegistry,
    cut_points: &[i32],
    options: &CentralityOptions,
) -> Result<CentralitySeries> {
    centrality_series_with_mode(records, registry, cut_points, options, SliceMode::Cumulative)
}

/// Like [`centrality_series`], but the columns may also be disjoint windows.
///
/// All columns share one node set (institutions from every record plus
/// always-include registry entries); nodes missing from a window simply score
/// zero there.
pub fn centrality_series_with_mode(
    records: &[HireRecord],
    registry: &InstitutionRegistry,
    cut_points: &[i32],
    options: &CentralityOptions,
    mode: SliceMode,
) -> Result<CentralitySeries> {
    options.validate()?;
    if cut_points.is_empty() {
        return Err(Error::Config("cut points must be non-empty".into()));
    }
    if cut_points.windows(2).any(|pair| pair[0] >= pair[1]) {
        return Err(Error::Config(format!(
            "cut points must be strictly increasing, got {cut_points:?}"
        )));
    }

    let min_year = records.iter().map(|r| r.employment_year).min().unwrap_or(cut_points[0]);
    let mut nodes: Vec<String> = Vec::new();
    let mut columns = Vec::with_capacity(cut_points.len());
    for (i, &end) in cut_points.iter().enumerate() {
        let window = match mode {
            SliceMode::Cumulative => TimeWindow::cumulative(end),
            SliceMode::Windowed => {
                let start = if i == 0 { min_year.min(end) } else { cut_points[i - 1] + 1 };
                TimeWindow::windowed(start, end)
            }
        };
        let network = build_network_with(records, registry, window, true);
        if i == 0 {
            nodes = network.nodes().to_vec();
        }
        debug_assert_eq!(nodes, network.nodes(), "node set must be stable across columns");
        if network.node_count() == 0 {
            columns.push(SeriesColumn {
                cut_point: end,
                label: window.label(),
                scores: Vec::new(),
                converged: true,
                iterations_used: 0,
            });
            continue;
        }
        let result = eigenvector_centrality(&network, options)?;
        columns.push(SeriesColumn {
            cut_point: end,
            label: window.label(),
            scores: nodes.iter().map(|id| result.scores[id]).collect(),
            converged: result.converged,
            iterations_used: result.iterations_used,
        });
    }
    Ok(CentralitySeries { nodes, columns })
}
