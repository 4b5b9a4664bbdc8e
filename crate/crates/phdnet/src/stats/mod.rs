//! Predictor panels, correlation, grade conversion, smoothing and trends.

pub mod dist;
pub mod ols;

pub use dist::{tail_probability, TailDistribution};
pub use ols::{durbin_watson, ols_fit, variance_inflation_factors, InterceptStats, PredictorStats, RegressionReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ExchangeNetwork;
use crate::ingest::{HireRecord, InstitutionRegistry};
use crate::stats::dist::student_t_upper_tail;

/// Labels of the panel columns, in design-matrix order.
pub const PREDICTOR_LABELS: [&str; 5] =
    ["self_ratio", "overseas_ratio", "new_ratio", "n", "tspek_ratio"];

/// Hiring-structure ratios for one employer.
///
/// Every ratio is the share of the employer's own total hires; an employer
/// with no hires reports zeros rather than undefined values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorRow {
    pub node: String,
    /// Hires of the employer's own graduates.
    pub self_ratio: f64,
    /// Hires from the aggregated overseas node.
    pub overseas_ratio: f64,
    /// Hires with employment year in the five years up to the reference year.
    pub new_ratio: f64,
    /// Total hires (the hiring scale), labelled `n` in reports.
    pub scale: u64,
    /// Hires from the institutions tagged `tsinghua` and `peking`.
    pub tspek_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorPanel {
    pub reference_year: i32,
    pub rows: Vec<PredictorRow>,
}

impl PredictorPanel {
    /// Columns in [`PREDICTOR_LABELS`] order, ready for [`ols_fit`].
    pub fn design_columns(&self) -> Vec<Vec<f64>> {
        vec![
            self.rows.iter().map(|r| r.self_ratio).collect(),
            self.rows.iter().map(|r| r.overseas_ratio).collect(),
            self.rows.iter().map(|r| r.new_ratio).collect(),
            self.rows.iter().map(|r| r.scale as f64).collect(),
            self.rows.iter().map(|r| r.tspek_ratio).collect(),
        ]
    }
}

/// Builds the predictor panel for the given employers.
///
/// `network` must be the full-range network the records were built into;
/// totals come from its rows, the recent-hire share from the records. The
/// registry must tag the two reference institutions (`tsinghua`, `peking`);
/// their absence from the network just means those cells are zero, but a
/// registry without the tags cannot define the ratio at all.
pub fn compute_predictors(
    records: &[HireRecord],
    network: &ExchangeNetwork,
    registry: &InstitutionRegistry,
    node_subset: &[String],
    reference_year: i32,
) -> Result<PredictorPanel> {
    if node_subset.is_empty() {
        return Err(Error::Config("node subset must be non-empty".into()));
    }
    let tagged_one = |tag: &str| -> Result<String> {
        let mut ids = registry.tagged(tag);
        match (ids.len(), ids.pop()) {
            (1, Some(id)) => Ok(id),
            (0, _) => Err(Error::Config(format!(
                "tspek_ratio needs a registry entry tagged `{tag}`"
            ))),
            _ => Err(Error::Config(format!("multiple registry entries tagged `{tag}`"))),
        }
    };
    let tsinghua = tagged_one("tsinghua")?;
    let peking = tagged_one("peking")?;
    let overseas = registry.overseas_id();
    let recent = (reference_year - 5 + 1)..=reference_year;

    let mut rows = Vec::with_capacity(node_subset.len());
    for node in node_subset {
        let total = network.index_of(node).map(|i| network.out_weight(i)).unwrap_or(0);
        if total == 0 {
            rows.push(PredictorRow {
                node: node.clone(),
                self_ratio: 0.0,
                overseas_ratio: 0.0,
                new_ratio: 0.0,
                scale: 0,
                tspek_ratio: 0.0,
            });
            continue;
        }
        let t = total as f64;
        let recent_hires = records
            .iter()
            .filter(|r| r.employer_unit == *node && recent.contains(&r.employment_year))
            .count() as f64;
        rows.push(PredictorRow {
            node: node.clone(),
            self_ratio: network.weight_between(node, node) as f64 / t,
            overseas_ratio: network.weight_between(node, overseas) as f64 / t,
            new_ratio: recent_hires / t,
            scale: total,
            tspek_ratio: (network.weight_between(node, &tsinghua)
                + network.weight_between(node, &peking)) as f64
                / t,
        });
    }
    Ok(PredictorPanel { reference_year, rows })
}

/// Pearson correlation with its t statistic and two-sided p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub r: f64,
    pub n: usize,
    pub t: f64,
    pub p: f64,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationReport> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::Dimension(format!("vectors of length {} and {}", n, y.len())));
    }
    if n < 3 {
        return Err(Error::Dimension(format!("correlation needs at least 3 points, got {n}")));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("correlation undefined for a constant vector".into()));
    }
    let mut r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    // Exactly collinear inputs must report exactly +/-1; rounding in the sums
    // otherwise leaves the result a few ulps short.
    if 1.0 - r.abs() < 1e-12 {
        r = r.signum();
    }
    let df = (n - 2) as f64;
    let (t, p) = if (1.0 - r * r) <= f64::EPSILON {
        (f64::INFINITY * r.signum(), 0.0)
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        (t, 2.0 * student_t_upper_tail(t.abs(), df))
    };
    Ok(CorrelationReport { r, n, t, p })
}

/// Ordinal encoding of discipline-evaluation letter grades.
///
/// The nine grades C- through A+ map to 1 through 9; an empty token means the
/// institution did not participate and maps to 0. Unrecognized tokens are
/// errors, never silently zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradeScale {
    ordered: Vec<(String, u8)>,
}

impl Default for GradeScale {
    fn default() -> Self {
        let grades = ["C-", "C", "C+", "B-", "B", "B+", "A-", "A", "A+"];
        Self {
            ordered: grades
                .iter()
                .enumerate()
                .map(|(i, g)| (g.to_string(), (i + 1) as u8))
                .collect(),
        }
    }
}

impl GradeScale {
    /// Grades in ascending rank order with their numeric values.
    pub fn entries(&self) -> &[(String, u8)] {
        &self.ordered
    }
}

pub fn grade_to_rank(token: &str, scale: &GradeScale) -> Result<u8> {
    let token = token.trim();
    if token.is_empty() {
        return Ok(0);
    }
    scale
        .ordered
        .iter()
        .find(|(g, _)| g == token)
        .map(|&(_, rank)| rank)
        .ok_or_else(|| Error::UnknownGrade(token.to_string()))
}

/// Arithmetic mean over each sliding window; output has `len - window + 1`
/// entries.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::Dimension("window must be at least 1".into()));
    }
    if window > series.len() {
        return Err(Error::Dimension(format!(
            "window {window} exceeds series length {}",
            series.len()
        )));
    }
    Ok(series
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect())
}

/// Least-squares slope of a series against its index.
fn slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean_t = (n - 1.0) / 2.0;
    let mean_v = values.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stv = 0.0;
    for (i, v) in values.iter().enumerate() {
        let dt = i as f64 - mean_t;
        stt += dt * dt;
        stv += dt * (v - mean_v);
    }
    if stt == 0.0 {
        0.0
    } else {
        stv / stt
    }
}

/// Reputation trend of one node: smooth its per-slice scores by a moving
/// average, then take the slope of the smoothed sequence over slice index.
pub fn trend_statistic(scores_by_slice: &[f64], window: usize) -> Result<f64> {
    if scores_by_slice.len() < 2 {
        return Err(Error::Dimension("trend needs at least 2 slices".into()));
    }
    let smoothed = moving_average(scores_by_slice, window)?;
    if smoothed.len() < 2 {
        return Err(Error::Dimension(format!(
            "only {} point(s) left after smoothing; reduce the window",
            smoothed.len()
        )));
    }
    Ok(slope(&smoothed))
}
